//! Jammer specification strings.
//!
//! ```text
//! spec  := ["msg_aware" [":salt=" u64] "+"] name [":" key "=" value ("," key "=" value)*]
//! ```
//!
//! Gaussian names: `gauss_trunc` (`lambda`, `delta`), `state_cancel` (`lambda`),
//! `random_dir` (`lambda`), `zero`. A missing `lambda` takes the channel's
//! value; a missing `delta` is `0.1 * lambda`.
//!
//! Discrete names: `memoryless` (`q`: rows `Q(.|s)` separated by `;`,
//! entries by `/`), `constant` (`j`), `worst` (the solver's minimizing `Q`).

use std::collections::BTreeMap;

use super::{
    ConstantJammer, DiscreteJammer, GaussianIidTruncated, GaussianJammer, MemorylessJammer, MessageAwareDiscrete,
    MessageAwareGaussian, MessageMap, RandomDirection, StateCancelling, ZeroJammer,
};
use crate::error::{Error, Result};
use crate::prob::ConditionalKernel;

const DEFAULT_SALT: u64 = 0x006d_6573_7361_6765;

fn bad(spec: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("jammer '{spec}': {why}"))
}

fn split_message_aware(spec: &str) -> Result<(Option<MessageMap>, &str)> {
    let spec = spec.trim();
    let Some(rest) = spec.strip_prefix("msg_aware") else { return Ok((None, spec)) };
    let (head, base) = rest.split_once('+').ok_or_else(|| bad(spec, "msg_aware needs '+<base>'"))?;
    let salt = match head.strip_prefix(":salt=") {
        Some(v) => v.trim().parse().map_err(|e| bad(spec, format!("salt: {e}")))?,
        None if head.is_empty() => DEFAULT_SALT,
        None => return Err(bad(spec, format!("unexpected '{head}'"))),
    };
    Ok((Some(MessageMap::Hashed { salt }), base.trim()))
}

fn split_params<'a>(spec: &str, base: &'a str) -> Result<(&'a str, BTreeMap<&'a str, &'a str>)> {
    let (name, rest) = base.split_once(':').unwrap_or((base, ""));
    let mut kv = BTreeMap::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| bad(spec, format!("expected key=value, got '{part}'")))?;
        if kv.insert(k.trim(), v.trim()).is_some() {
            return Err(bad(spec, format!("duplicate key '{k}'")));
        }
    }
    Ok((name.trim(), kv))
}

fn take_f64(spec: &str, kv: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<f64>> {
    kv.remove(key).map(|v| v.parse::<f64>().map_err(|e| bad(spec, format!("{key}: {e}")))).transpose()
}

fn finish(spec: &str, kv: BTreeMap<&str, &str>) -> Result<()> {
    match kv.keys().next() {
        Some(k) => Err(bad(spec, format!("unknown key '{k}'"))),
        None => Ok(()),
    }
}

/// Build a Gaussian jammer; `channel_lambda` fills a missing `lambda`.
pub fn parse_gaussian(spec: &str, channel_lambda: f64) -> Result<Box<dyn GaussianJammer>> {
    let (map, base) = split_message_aware(spec)?;
    let (name, mut kv) = split_params(spec, base)?;
    let lambda = take_f64(spec, &mut kv, "lambda")?.unwrap_or(channel_lambda);
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(bad(spec, "lambda must be nonnegative"));
    }
    if lambda > channel_lambda * (1.0 + 1e-12) {
        return Err(bad(spec, format!("lambda {lambda} exceeds the channel budget {channel_lambda}")));
    }
    let jammer: Box<dyn GaussianJammer> = match name {
        "gauss_trunc" => {
            let delta = take_f64(spec, &mut kv, "delta")?.unwrap_or(0.1 * lambda);
            Box::new(GaussianIidTruncated::new(lambda, delta).map_err(|e| bad(spec, e))?)
        }
        "state_cancel" => Box::new(StateCancelling { lambda }),
        "random_dir" => Box::new(RandomDirection { lambda }),
        "zero" => Box::new(ZeroJammer),
        other => return Err(bad(spec, format!("unknown Gaussian jammer '{other}'"))),
    };
    finish(spec, kv)?;
    Ok(match map {
        Some(map) => Box::new(MessageAwareGaussian { base: jammer, map }),
        None => jammer,
    })
}

fn parse_rows(spec: &str, text: &str, j_size: usize, s_size: usize) -> Result<ConditionalKernel> {
    let rows: Vec<&str> = text.split(';').map(str::trim).collect();
    let rows = if rows.len() == 1 { vec![rows[0]; s_size] } else { rows };
    if rows.len() != s_size {
        return Err(bad(spec, format!("q has {} rows, expected one per state ({s_size})", rows.len())));
    }
    let mut table = Vec::with_capacity(j_size * s_size);
    for row in rows {
        let vals = row
            .split('/')
            .map(|v| v.trim().parse::<f64>().map_err(|e| bad(spec, format!("q entry '{v}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != j_size {
            return Err(bad(spec, format!("q row has {} entries, |J| = {j_size}", vals.len())));
        }
        table.extend(vals);
    }
    ConditionalKernel::new(j_size, vec![s_size], table).map_err(|e| bad(spec, e))
}

/// Build a discrete jammer over `|J|` letters for `|S|` states. `worst` is
/// the solver's minimizing kernel, required only by the `worst` name.
pub fn parse_discrete(
    spec: &str,
    j_size: usize,
    s_size: usize,
    worst: Option<&ConditionalKernel>,
) -> Result<Box<dyn DiscreteJammer>> {
    let (map, base) = split_message_aware(spec)?;
    let (name, mut kv) = split_params(spec, base)?;
    let jammer: Box<dyn DiscreteJammer> = match name {
        "memoryless" => {
            let q = kv.remove("q").ok_or_else(|| bad(spec, "memoryless needs q=..."))?;
            Box::new(MemorylessJammer::new(parse_rows(spec, q, j_size, s_size)?)?)
        }
        "constant" => {
            let symbol = kv.remove("j").unwrap_or("0");
            let symbol: usize = symbol.parse().map_err(|e| bad(spec, format!("j: {e}")))?;
            if symbol >= j_size {
                return Err(bad(spec, format!("letter {symbol} outside |J| = {j_size}")));
            }
            Box::new(ConstantJammer { symbol, alphabet: j_size })
        }
        "worst" => {
            let q = worst.ok_or_else(|| bad(spec, "no solver result available for 'worst'"))?;
            Box::new(MemorylessJammer::new(q.clone())?.with_label("worst"))
        }
        other => return Err(bad(spec, format!("unknown discrete jammer '{other}'"))),
    };
    finish(spec, kv)?;
    Ok(match map {
        Some(map) => Box::new(MessageAwareDiscrete { base: jammer, map }),
        None => jammer,
    })
}
