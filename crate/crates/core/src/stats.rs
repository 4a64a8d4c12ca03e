//! Small statistics helpers used by the simulators and the test suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided Wilson score interval for `k` successes in `n` trials at normal
/// quantile `z` (1.96 for 95%).
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// 95% Wilson interval.
pub fn wilson95(k: u64, n: u64) -> (f64, f64) {
    wilson_interval(k, n, 1.959_963_984_540_054)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Linear-interpolation quantile (type 7). NaNs are not allowed.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty sample");
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Pearson chi-square test of homogeneity for a table of counts
/// (rows = samples, columns = categories). Columns with zero total are
/// dropped. Returns `(statistic, p_value)`.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> (f64, f64) {
    let cols = table.first().map_or(0, Vec::len);
    let col_tot: Vec<f64> = (0..cols).map(|j| table.iter().map(|r| r[j] as f64).sum()).collect();
    let row_tot: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let total: f64 = row_tot.iter().sum();
    let live: Vec<usize> = (0..cols).filter(|&j| col_tot[j] > 0.0).collect();
    let rows = row_tot.iter().filter(|&&r| r > 0.0).count();
    let mut stat = 0.0;
    for (i, r) in table.iter().enumerate() {
        for &j in &live {
            let e = row_tot[i] * col_tot[j] / total;
            if e > 0.0 {
                stat += (r[j] as f64 - e).powi(2) / e;
            }
        }
    }
    let df = (rows.saturating_sub(1) * live.len().saturating_sub(1)) as f64;
    if df == 0.0 {
        return (stat, 1.0);
    }
    let p = 1.0 - ChiSquared::new(df).expect("positive dof").cdf(stat);
    (stat, p)
}

/// Pearson goodness-of-fit test of `observed` counts against cell
/// probabilities `probs`. Returns `(statistic, p_value)`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), probs.len());
    let total: f64 = observed.iter().sum::<u64>() as f64;
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| (o as f64 - total * p).powi(2) / (total * p))
        .sum();
    let df = probs.iter().filter(|&&p| p > 0.0).count().saturating_sub(1) as f64;
    if df == 0.0 {
        return (stat, 1.0);
    }
    (stat, 1.0 - ChiSquared::new(df).expect("positive dof").cdf(stat))
}

/// Two-sample Kolmogorov-Smirnov test. Returns `(D, asymptotic p_value)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.partial_cmp(q).unwrap());
    y.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = 2.0 * if k % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Ordinary least squares fit `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need two points for a line");
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept: my - slope * mx, r_squared }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // statsmodels proportion_confint(3, 50, method="wilson")
        let (lo, hi) = wilson95(3, 50);
        assert!((lo - 0.020_614_970_3).abs() < 1e-8, "{lo}");
        assert!((hi - 0.162_170_916_9).abs() < 1e-8, "{hi}");
        let (lo, _) = wilson95(0, 20);
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert!((quantile(&xs, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn chi_square_reference() {
        // scipy.stats.chi2_contingency([[10, 20], [20, 10]], correction=False)
        let (s, p) = chi_square_homogeneity(&[vec![10, 20], vec![20, 10]]);
        assert!((s - 6.666_666_666_7).abs() < 1e-8);
        assert!((p - 0.009_823_274_507).abs() < 1e-8);
    }

    #[test]
    fn gof_reference() {
        // scipy.stats.chisquare([18, 22, 30, 30], [25, 25, 25, 25])
        let (s, p) = chi_square_gof(&[18, 22, 30, 30], &[0.25; 4]);
        assert!((s - 4.32).abs() < 1e-12);
        assert!((p - 0.228_918_864_3).abs() < 1e-8, "{p}");
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        let (d, p) = ks_two_sample(&a, &b);
        assert!((d - 0.3).abs() < 0.01);
        assert!(p < 1e-10);
        let (_, p_same) = ks_two_sample(&a, &a);
        assert!(p_same > 0.99);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }
}
