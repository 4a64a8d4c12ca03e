use crate::error::{Error, Result};

/// Inputs whose total mass is within this distance of one are renormalized;
/// anything further off is rejected.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A finite alphabet `{0, 1, ..., size - 1}` with optional display labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::DimensionMismatch("alphabet must have at least one symbol".into()));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut alphabet = Self::new(labels.len())?;
        alphabet.labels = Some(labels);
        Ok(alphabet)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, symbol: usize) -> String {
        match &self.labels {
            Some(labels) => labels[symbol].clone(),
            None => symbol.to_string(),
        }
    }
}

fn validate_mass(mass: &mut [f64]) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::InvalidDistribution("empty mass vector".into()));
    }
    if let Some(bad) = mass.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {bad} is negative or not finite")));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("mass sums to {total}")));
    }
    mass.iter_mut().for_each(|p| *p /= total);
    Ok(())
}

/// Entropy in bits of a probability vector. Zero cells contribute nothing.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// A probability mass function on a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    mass: Vec<f64>,
}

impl Distribution {
    pub fn new(mut mass: Vec<f64>) -> Result<Self> {
        validate_mass(&mut mass)?;
        Ok(Self { mass })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0);
        Self { mass: vec![1.0 / size as f64; size] }
    }

    pub fn point(size: usize, symbol: usize) -> Self {
        let mut mass = vec![0.0; size];
        mass[symbol] = 1.0;
        Self { mass }
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.mass[symbol]
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.mass)
    }

    pub fn linf_distance(&self, other: &[f64]) -> f64 {
        linf(&self.mass, other)
    }
}

pub fn entropy(p: &Distribution) -> f64 {
    p.entropy()
}

pub(crate) fn linf(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A distribution on a product alphabet `A x B`, stored row-major (`b` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, mut mass: Vec<f64>) -> Result<Self> {
        if rows * cols != mass.len() || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} joint table", mass.len())));
        }
        validate_mass(&mut mass)?;
        Ok(Self { rows, cols, mass })
    }

    pub fn product(a: &Distribution, b: &Distribution) -> Self {
        let mass = a.mass().iter().flat_map(|pa| b.mass().iter().map(move |pb| pa * pb)).collect();
        Self { rows: a.len(), cols: b.len(), mass }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.mass[a * self.cols + b]
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        self.mass.chunks(self.cols).map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.mass.chunks(self.cols) {
            out.iter_mut().zip(row).for_each(|(o, p)| *o += p);
        }
        out
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.mass)
    }

    pub fn mutual_information(&self) -> f64 {
        mutual_information_table(&self.mass, self.rows, self.cols)
    }
}

/// `I(A;B)` in bits of a row-major joint table that need not be normalized
/// exactly. Computed as `sum p log p / (p_a p_b)` so that independent tables
/// give an exact zero.
pub fn mutual_information_table(mass: &[f64], rows: usize, cols: usize) -> f64 {
    let mut pa = vec![0.0; rows];
    let mut pb = vec![0.0; cols];
    for a in 0..rows {
        for b in 0..cols {
            let p = mass[a * cols + b];
            pa[a] += p;
            pb[b] += p;
        }
    }
    let mut mi = 0.0;
    for a in 0..rows {
        for b in 0..cols {
            let p = mass[a * cols + b];
            if p > 0.0 {
                mi += p * (p / (pa[a] * pb[b])).log2();
            }
        }
    }
    mi.max(0.0)
}

pub fn mutual_information(joint: &JointDistribution) -> f64 {
    joint.mutual_information()
}

/// A stochastic kernel `P(out | c_1, ..., c_k)`.
///
/// The table is laid out with the conditioning symbols as the major index (in
/// the order given, last one fastest) and the output symbol fastest, so each
/// conditioning slice is a contiguous probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel {
    outputs: usize,
    conditions: Vec<usize>,
    table: Vec<f64>,
}

impl ConditionalKernel {
    pub fn new(outputs: usize, conditions: Vec<usize>, mut table: Vec<f64>) -> Result<Self> {
        let slices: usize = conditions.iter().product();
        if outputs == 0 || conditions.contains(&0) {
            return Err(Error::DimensionMismatch("kernel dimensions must be positive".into()));
        }
        if table.len() != outputs * slices {
            return Err(Error::DimensionMismatch(format!(
                "kernel table has {} entries, expected {} x {}",
                table.len(),
                slices,
                outputs
            )));
        }
        for (i, slice) in table.chunks_mut(outputs).enumerate() {
            validate_mass(slice).map_err(|e| Error::InvalidDistribution(format!("conditioning slice {i}: {e}")))?;
        }
        Ok(Self { outputs, conditions, table })
    }

    /// Build a kernel by evaluating `f(out, conditioning symbols)`.
    pub fn from_fn(outputs: usize, conditions: Vec<usize>, mut f: impl FnMut(usize, &[usize]) -> f64) -> Result<Self> {
        let slices: usize = conditions.iter().product();
        let mut table = Vec::with_capacity(outputs * slices);
        let mut index = vec![0; conditions.len()];
        for flat in 0..slices {
            unflatten(flat, &conditions, &mut index);
            for out in 0..outputs {
                table.push(f(out, &index));
            }
        }
        Self::new(outputs, conditions, table)
    }

    /// Every slice uniform.
    pub fn uniform(outputs: usize, conditions: Vec<usize>) -> Self {
        let slices: usize = conditions.iter().product();
        Self { outputs, conditions, table: vec![1.0 / outputs as f64; outputs * slices] }
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn conditions(&self) -> &[usize] {
        &self.conditions
    }

    pub fn slice_count(&self) -> usize {
        self.table.len() / self.outputs
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn flat_condition(&self, cond: &[usize]) -> usize {
        debug_assert_eq!(cond.len(), self.conditions.len());
        cond.iter().zip(&self.conditions).fold(0, |acc, (c, d)| acc * d + c)
    }

    pub fn slice(&self, flat: usize) -> &[f64] {
        &self.table[flat * self.outputs..(flat + 1) * self.outputs]
    }

    pub fn prob(&self, out: usize, cond: &[usize]) -> f64 {
        self.table[self.flat_condition(cond) * self.outputs + out]
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        linf(&self.table, &other.table)
    }
}

pub(crate) fn unflatten(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
}
