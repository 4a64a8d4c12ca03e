use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;

use super::{AdversaryRng, Knowledge, MessageMap, PublicCodeParams};
use crate::error::{Error, Result};
use crate::prob::ConditionalKernel;

/// Jammer over a finite alphabet `J`.
pub trait DiscreteJammer: Send + Sync {
    fn id(&self) -> String;
    fn knowledge(&self) -> Knowledge;
    fn alphabet(&self) -> usize;
    fn jam(&self, message: u64, state: &[usize], params: &PublicCodeParams, rng: &mut AdversaryRng) -> Vec<usize>;
}

/// `j_i ~ Q(. | s_i)` independently.
#[derive(Debug, Clone)]
pub struct MemorylessJammer {
    q: ConditionalKernel,
    samplers: Vec<WeightedIndex<f64>>,
    label: String,
}

impl MemorylessJammer {
    pub fn new(q: ConditionalKernel) -> Result<Self> {
        if q.conditions().len() != 1 {
            return Err(Error::DimensionMismatch("memoryless jammer needs a kernel J | S".into()));
        }
        let samplers = (0..q.slice_count())
            .map(|s| WeightedIndex::new(q.slice(s).iter().copied()))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Self { q, samplers, label: "memoryless".into() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn kernel(&self) -> &ConditionalKernel {
        &self.q
    }
}

impl DiscreteJammer for MemorylessJammer {
    fn id(&self) -> String {
        self.label.clone()
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge::STATE
    }

    fn alphabet(&self) -> usize {
        self.q.outputs()
    }

    fn jam(&self, _message: u64, state: &[usize], _params: &PublicCodeParams, rng: &mut AdversaryRng) -> Vec<usize> {
        state.iter().map(|&s| self.samplers[s].sample(rng)).collect()
    }
}

/// Always the same letter.
#[derive(Debug, Clone, Copy)]
pub struct ConstantJammer {
    pub symbol: usize,
    pub alphabet: usize,
}

impl DiscreteJammer for ConstantJammer {
    fn id(&self) -> String {
        format!("constant{}", self.symbol)
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge::NONE
    }

    fn alphabet(&self) -> usize {
        self.alphabet
    }

    fn jam(&self, _message: u64, state: &[usize], _params: &PublicCodeParams, _rng: &mut AdversaryRng) -> Vec<usize> {
        vec![self.symbol; state.len()]
    }
}

/// Cyclically shifts each letter of the base output by a message-keyed amount.
pub struct MessageAwareDiscrete {
    pub base: Box<dyn DiscreteJammer>,
    pub map: MessageMap,
}

impl DiscreteJammer for MessageAwareDiscrete {
    fn id(&self) -> String {
        format!("msg_aware+{}", self.base.id())
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge { message: true, ..self.base.knowledge() }
    }

    fn alphabet(&self) -> usize {
        self.base.alphabet()
    }

    fn jam(&self, message: u64, state: &[usize], params: &PublicCodeParams, rng: &mut AdversaryRng) -> Vec<usize> {
        let k = self.alphabet() as u64;
        let mut j = self.base.jam(message, state, params, rng);
        for (i, x) in j.iter_mut().enumerate() {
            if let Some(bits) = self.map.bits(message, i as u64) {
                *x = ((*x as u64 + bits % k) % k) as usize;
            }
        }
        j
    }
}
