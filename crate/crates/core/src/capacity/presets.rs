//! Small discrete channels used by the CLI, the examples and the tests.

use super::GpChannelSpec;
use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, Distribution};

fn stuck_states(p: f64) -> Result<Distribution> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("stuck probability must lie in (0, 1), got {p}")));
    }
    Distribution::new(vec![p / 2.0, p / 2.0, 1.0 - p])
}

/// Memory cell stuck at 0 or 1 with probability `p / 2` each and written
/// faithfully otherwise (`S = 2`). The jammer has a single letter.
pub fn stuck_at(p: f64) -> Result<GpChannelSpec> {
    let w = ConditionalKernel::from_fn(2, vec![2, 3, 1], |y, c| {
        let cell = if c[1] < 2 { c[1] } else { c[0] };
        f64::from(y == cell)
    })?;
    GpChannelSpec::new(w, stuck_states(p)?)
}

/// `Y = X xor S xor J` with a uniform binary state.
pub fn binary_additive() -> Result<GpChannelSpec> {
    let w = ConditionalKernel::from_fn(2, vec![2, 2, 2], |y, c| f64::from(y == c[0] ^ c[1] ^ c[2]))?;
    GpChannelSpec::new(w, Distribution::uniform(2))
}

/// Stuck-at cell read through a BSC whose crossover `noise[j]` the jammer
/// picks.
pub fn noisy_stuck_at(p: f64, noise: [f64; 2]) -> Result<GpChannelSpec> {
    if noise.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::Domain(format!("read noise must lie in [0, 1], got {noise:?}")));
    }
    let w = ConditionalKernel::from_fn(2, vec![2, 3, 2], |y, c| {
        let cell = if c[1] < 2 { c[1] } else { c[0] };
        if y == cell {
            1.0 - noise[c[2]]
        } else {
            noise[c[2]]
        }
    })?;
    GpChannelSpec::new(w, stuck_states(p)?)
}

/// Channel from a table of rows `W(. | x, s, j)` in `(x, s, j)` order.
pub fn explicit(sizes: [usize; 4], rows: &[Vec<f64>], p_s: Vec<f64>) -> Result<GpChannelSpec> {
    let [x, s, j, y] = sizes;
    if rows.len() != x * s * j || rows.iter().any(|r| r.len() != y) {
        return Err(Error::DimensionMismatch(format!("W needs {} rows of {y} entries", x * s * j)));
    }
    let w = ConditionalKernel::new(y, vec![x, s, j], rows.concat())?;
    GpChannelSpec::new(w, Distribution::new(p_s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let c = noisy_stuck_at(0.2, [0.0, 0.1]).unwrap();
        assert_eq!((c.x_size(), c.s_size(), c.j_size(), c.y_size()), (2, 3, 2, 2));
        assert_eq!(c.w(1, 0, 1, 1), 0.9);
        assert_eq!(stuck_at(0.2).unwrap().w(1, 0, 2, 0), 0.0);
        assert_eq!(binary_additive().unwrap().w(1, 1, 1, 1), 1.0);
        assert!(stuck_at(1.0).is_err());
        assert!(noisy_stuck_at(0.2, [0.0, 1.5]).is_err());
    }

    #[test]
    fn explicit_matches_preset() {
        let b = binary_additive().unwrap();
        let rows: Vec<Vec<f64>> = (0..8).map(|i| (0..2).map(|y| b.w.table()[i * 2 + y]).collect()).collect();
        assert_eq!(explicit([2, 2, 2, 2], &rows, vec![0.5, 0.5]).unwrap(), b);
        assert!(explicit([2, 2, 2, 2], &rows[..7], vec![0.5, 0.5]).is_err());
    }
}
