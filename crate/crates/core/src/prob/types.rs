use super::dist::{linf, Distribution, JointDistribution};

/// Absolute slack applied to every typicality comparison so that a count that
/// sits exactly on the boundary `|c/n - p| = delta` is not lost to rounding.
pub const TYPICALITY_SLACK: f64 = 1e-12;

/// Block length and l-infinity radius of a typical set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalSetParams {
    pub n: usize,
    pub delta: f64,
}

impl TypicalSetParams {
    pub fn new(n: usize, delta: f64) -> Self {
        assert!(delta >= 0.0, "typicality radius must be nonnegative");
        Self { n, delta }
    }
}

/// Symbol counts of a sequence (or of a tuple of sequences, flattened).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmpiricalType {
    counts: Vec<usize>,
    n: usize,
}

impl EmpiricalType {
    pub fn of(seq: &[usize], alphabet: usize) -> Self {
        let mut counts = vec![0; alphabet];
        for &x in seq {
            counts[x] += 1;
        }
        Self { counts, n: seq.len() }
    }

    /// Joint type of `(a, b)`, indexed `a * kb + b`.
    pub fn joint(a: &[usize], ka: usize, b: &[usize], kb: usize) -> Self {
        assert_eq!(a.len(), b.len(), "joint type of sequences with different lengths");
        let mut counts = vec![0; ka * kb];
        for (&x, &y) in a.iter().zip(b) {
            counts[x * kb + y] += 1;
        }
        Self { counts, n: a.len() }
    }

    pub fn from_counts(counts: Vec<usize>) -> Self {
        let n = counts.iter().sum();
        Self { counts, n }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn linf_distance(&self, p: &[f64]) -> f64 {
        linf(&self.frequencies(), p)
    }
}

/// `||T_x - p||_inf <= delta`.
pub fn is_typical(x: &[usize], p: &Distribution, params: TypicalSetParams) -> bool {
    debug_assert_eq!(x.len(), params.n);
    EmpiricalType::of(x, p.len()).linf_distance(p.mass()) <= params.delta + TYPICALITY_SLACK
}

/// `||T_{x,y} - P_{XY}||_inf <= delta`.
pub fn is_jointly_typical(x: &[usize], y: &[usize], joint: &JointDistribution, delta: f64) -> bool {
    EmpiricalType::joint(x, joint.rows(), y, joint.cols()).linf_distance(joint.mass()) <= delta + TYPICALITY_SLACK
}

/// Table of `ln k!`.
#[derive(Debug, Clone)]
pub struct LogFactorial(Vec<f64>);

impl LogFactorial {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 1..=max {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self(table)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// `ln (total! / prod c_i!)`.
    pub fn multinomial<I: IntoIterator<Item = usize>>(&self, total: usize, parts: I) -> f64 {
        self.0[total] - parts.into_iter().map(|c| self.0[c]).sum::<f64>()
    }
}

/// Counts `c in [0, n]` with `|c / n - target| <= radius`, as an inclusive range.
/// `None` when no integer qualifies.
pub(crate) fn count_range(target: f64, n: usize, radius: f64) -> Option<(usize, usize)> {
    let ok = |c: usize| (c as f64 / n as f64 - target).abs() <= radius + TYPICALITY_SLACK;
    let nf = n as f64;
    let mut lo = ((target - radius) * nf).floor().max(0.0) as usize;
    let mut hi = (((target + radius) * nf).ceil().max(0.0) as usize).min(n);
    while lo <= hi && !ok(lo) {
        lo += 1;
    }
    while hi >= lo && !ok(hi) {
        if hi == 0 {
            return None;
        }
        hi -= 1;
    }
    (lo <= hi).then_some((lo, hi))
}

/// Number of vectors `compositions(total, ranges)` would return.
pub(crate) fn count_compositions(total: usize, ranges: &[(usize, usize)]) -> f64 {
    // ways[r] = number of ways to fill the parts seen so far with sum r
    let mut ways = vec![0.0f64; total + 1];
    ways[0] = 1.0;
    for &(lo, hi) in ranges {
        let mut next = vec![0.0f64; total + 1];
        for (r, &w) in ways.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for c in lo..=hi.min(total - r) {
                next[r + c] += w;
            }
        }
        ways = next;
    }
    ways[total]
}

/// All vectors `c` with `c_i` in `ranges[i]` and `sum c_i = total`, in
/// lexicographic order.
pub(crate) fn compositions(total: usize, ranges: &[(usize, usize)]) -> Vec<Vec<u32>> {
    fn rec(
        i: usize,
        remaining: usize,
        ranges: &[(usize, usize)],
        tail_min: &[usize],
        tail_max: &[usize],
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == ranges.len() {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        let (lo, hi) = ranges[i];
        for c in lo..=hi.min(remaining) {
            let rest = remaining - c;
            if rest < tail_min[i + 1] || rest > tail_max[i + 1] {
                continue;
            }
            current.push(c as u32);
            rec(i + 1, rest, ranges, tail_min, tail_max, current, out);
            current.pop();
        }
    }
    let k = ranges.len();
    let mut tail_min = vec![0; k + 1];
    let mut tail_max = vec![0; k + 1];
    for i in (0..k).rev() {
        tail_min[i] = tail_min[i + 1] + ranges[i].0;
        tail_max[i] = tail_max[i + 1] + ranges[i].1;
    }
    let mut out = Vec::new();
    if total >= tail_min[0] && total <= tail_max[0] {
        rec(0, total, ranges, &tail_min, &tail_max, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Counts summing to `n` closest to `n p` (largest remainders, ties to the
/// lower index).
pub fn nominal_counts(p: &[f64], n: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = p.iter().map(|&x| (x * n as f64).floor() as usize).collect();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = p[a] * n as f64 - counts[a] as f64;
        let rb = p[b] * n as f64 - counts[b] as f64;
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_counts_sum_to_n() {
        assert_eq!(nominal_counts(&[0.1, 0.1, 0.8], 64), vec![7, 6, 51]);
        assert_eq!(nominal_counts(&[0.5, 0.5], 3).iter().sum::<usize>(), 3);
    }

    #[test]
    fn typicality_examples() {
        let p = Distribution::uniform(2);
        let x = [0, 0, 0, 1];
        assert!(!is_typical(&x, &p, TypicalSetParams::new(4, 0.2)));
        assert!(is_typical(&x, &p, TypicalSetParams::new(4, 0.25)));
        assert!(is_typical(&x, &p, TypicalSetParams::new(4, 1.0)));
        let balanced = [0, 1, 1, 0];
        assert!(is_typical(&balanced, &p, TypicalSetParams::new(4, 0.0)));
    }

    #[test]
    fn joint_typicality() {
        let joint = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(is_jointly_typical(&[0, 1, 0, 1], &[0, 1, 0, 1], &joint, 0.0));
        assert!(!is_jointly_typical(&[0, 1, 0, 1], &[1, 1, 0, 1], &joint, 0.2));
    }

    #[test]
    fn count_ranges() {
        assert_eq!(count_range(0.5, 6, 0.17), Some((2, 4)));
        assert_eq!(count_range(0.5, 6, 0.0), Some((3, 3)));
        assert_eq!(count_range(0.5, 5, 0.0), None);
        assert_eq!(count_range(0.0, 10, 0.05), Some((0, 0)));
        assert_eq!(count_range(1.0, 10, 2.0), Some((0, 10)));
    }

    #[test]
    fn compositions_are_exhaustive() {
        let all = compositions(4, &[(0, 4), (0, 4), (0, 4)]);
        assert_eq!(all.len(), 15);
        assert!(all.iter().all(|c| c.iter().sum::<u32>() == 4));
        assert_eq!(compositions(5, &[(0, 1), (0, 1)]).len(), 0);
        for (total, ranges) in [(4, vec![(0, 4); 3]), (7, vec![(1, 3), (0, 5), (2, 2)]), (5, vec![(0, 1), (0, 1)])] {
            assert_eq!(count_compositions(total, &ranges), compositions(total, &ranges).len() as f64);
        }
    }

    proptest::proptest! {
        #[test]
        fn counted_compositions_match_enumeration(
            total in 0usize..12,
            ranges in proptest::collection::vec((0usize..6, 0usize..6), 1..5),
        ) {
            let ranges: Vec<(usize, usize)> = ranges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
            proptest::prop_assert_eq!(count_compositions(total, &ranges), compositions(total, &ranges).len() as f64);
        }
    }

    #[test]
    fn log_multinomial_matches_direct_count() {
        let lf = LogFactorial::new(10);
        // 10! / (3! 3! 4!) = 4200
        assert!((lf.multinomial(10, [3, 3, 4]).exp() - 4200.0).abs() < 1e-8);
    }
}
