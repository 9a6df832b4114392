use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AceError {
    #[error("default recall is zero; ACE undefined")]
    ZeroDefault,
    #[error("no words perturbed")]
    NoPerturbation,
    #[error("scale must be a power of 10, got {0}")]
    Scale(u64),
    #[error("outcome must be finite and non-negative, got {0}")]
    Outcome(f64),
    #[error("per-query outcome lists differ in length ({0} vs {1})")]
    Length(usize, usize),
}

/// How the expectation over outcome changes is taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AceMode {
    /// Relative change of the corpus-level recall.
    #[default]
    Corpus,
    /// Fraction of default hits that flip under the edit.
    PerQuery,
}

impl AceMode {
    pub fn is_default(&self) -> bool {
        *self == AceMode::Corpus
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AceScore {
    pub value: f64,
    pub o: f64,
    pub o_star: f64,
    pub n: usize,
    pub scale: u64,
}

pub fn check_scale(scale: u64) -> Result<(), AceError> {
    let mut s = scale;
    while s >= 10 && s.is_multiple_of(10) {
        s /= 10;
    }
    if s == 1 {
        Ok(())
    } else {
        Err(AceError::Scale(scale))
    }
}

/// Outcomes are compared on a 1e-12 grid so that decimal inputs like 0.5
/// and 0.4 difference exactly.
const GRID: f64 = 1e12;

fn quantize(x: f64) -> Result<u128, AceError> {
    if !x.is_finite() || x < 0.0 {
        return Err(AceError::Outcome(x));
    }
    Ok((x * GRID).round() as u128)
}

/// `num / den` with both sides exact integers where they fit.
fn ratio(num_a: u128, num_b: u128, den_a: u128, den_b: u128) -> f64 {
    match (num_a.checked_mul(num_b), den_a.checked_mul(den_b)) {
        (Some(n), Some(d)) => n as f64 / d as f64,
        _ => (num_a as f64 * num_b as f64) / (den_a as f64 * den_b as f64),
    }
}

/// `|o - o_star| / o / n * scale`.
pub fn ace(o: f64, o_star: f64, n: usize, scale: u64) -> Result<AceScore, AceError> {
    check_scale(scale)?;
    let (qo, qs) = (quantize(o)?, quantize(o_star)?);
    if n == 0 {
        return Err(AceError::NoPerturbation);
    }
    if qo == 0 {
        return Err(AceError::ZeroDefault);
    }
    Ok(AceScore {
        value: ratio(qo.abs_diff(qs), scale as u128, qo, n as u128),
        o,
        o_star,
        n,
        scale,
    })
}

/// Per-query variant: over the queries the default stream gets right, the
/// fraction the edited stream gets wrong, divided by `n` and scaled.
pub fn ace_per_query(default_hits: &[bool], edited_hits: &[bool], n: usize, scale: u64) -> Result<AceScore, AceError> {
    check_scale(scale)?;
    if default_hits.len() != edited_hits.len() {
        return Err(AceError::Length(default_hits.len(), edited_hits.len()));
    }
    if n == 0 {
        return Err(AceError::NoPerturbation);
    }
    let hits = default_hits.iter().filter(|&&h| h).count();
    if hits == 0 {
        return Err(AceError::ZeroDefault);
    }
    let flips = default_hits.iter().zip(edited_hits).filter(|(&d, &e)| d && !e).count();
    let total = default_hits.len() as f64;
    Ok(AceScore {
        value: ratio(flips as u128, scale as u128, hits as u128, n as u128),
        o: hits as f64 / total,
        o_star: edited_hits.iter().filter(|&&h| h).count() as f64 / total,
        n,
        scale,
    })
}
