//! Uniform points on spheres and small vector helpers.

use rand::Rng;
use rand_distr::StandardNormal;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `<a, b> / (|a| |b|)`, or 0 when either vector vanishes.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let d = (norm_sq(a) * norm_sq(b)).sqrt();
    if d == 0.0 {
        0.0
    } else {
        dot(a, b) / d
    }
}

/// Uniform point on the sphere of the given radius in `R^n`: a standard
/// Gaussian vector rescaled. A zero draw is redrawn.
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    assert!(n >= 1 && radius > 0.0, "sphere needs n >= 1 and a positive radius");
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm_sq(&v).sqrt();
        if norm > 0.0 {
            let scale = radius / norm;
            v.iter_mut().for_each(|x| *x *= scale);
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norm_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 17, 512] {
            let v = sample_sphere(n, 3.5, &mut rng);
            assert!((norm_sq(&v).sqrt() / 3.5 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn independent_draws_are_nearly_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 256;
        let bound = 4.0 / (n as f64).sqrt();
        let inside = (0..10_000)
            .filter(|_| cosine(&sample_sphere(n, 1.0, &mut rng), &sample_sphere(n, 1.0, &mut rng)).abs() <= bound)
            .count();
        assert!(inside >= 9_900, "{inside}");
    }

    #[test]
    fn cosine_of_degenerate_vector_is_zero() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
        assert!((cosine(&[1.0, 0.0], &[2.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
