//! Bucketed value distributions and the statistics compared across limbs.

use alloc::vec;
use alloc::vec::Vec;

use super::kmeans::SharedBuckets;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValueHistogram {
    pub bucket_centers: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub bucket_boundaries: Vec<f64>,
    pub counts: Vec<u64>,
    /// Add-one smoothed: `(count + 1) / (N + K)`. Never zero.
    pub probabilities: Vec<f64>,
}

impl ValueHistogram {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn comparable(&self, other: &ValueHistogram) -> bool {
        self.k() == other.k()
            && self.probabilities.len() == other.probabilities.len()
            && self.bucket_boundaries == other.bucket_boundaries
    }
}

/// Counts `values` into the shared buckets and smooths the counts.
pub fn histogram(values: &[f64], buckets: &SharedBuckets) -> Result<ValueHistogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values for histogram"));
    }
    let k = buckets.k();
    let mut counts = vec![0u64; k];
    for &v in values {
        counts[buckets.bucket_of(v)] += 1;
    }
    let denom = (values.len() + k) as f64;
    let probabilities = counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect();
    Ok(ValueHistogram {
        bucket_centers: buckets.centers.clone(),
        bucket_boundaries: buckets.boundaries.clone(),
        counts,
        probabilities,
    })
}

/// `Σ q_i ln(q_i / p_i)` over two probability vectors of equal length with `p_i > 0`
/// wherever `q_i > 0`.
pub fn kl_divergence_probs(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() || q.is_empty() {
        return Err(Error::HistogramsNotComparable);
    }
    let sum: f64 = q.iter().zip(p).filter(|(&qi, _)| qi > 0.0).map(|(&qi, &pi)| qi * libm::log(qi / pi)).sum();
    // Gibbs' inequality; only rounding can push the sum below zero.
    Ok(sum.max(0.0))
}

/// Divergence of `q` from the reference distribution `p`. Both must come from the same
/// shared buckets.
pub fn kl_divergence(q: &ValueHistogram, p: &ValueHistogram) -> Result<f64> {
    if !q.comparable(p) {
        return Err(Error::HistogramsNotComparable);
    }
    kl_divergence_probs(&q.probabilities, &p.probabilities)
}

/// Adjusted Fisher–Pearson sample skewness
/// `n / ((n-1)(n-2)) · Σ ((x - mean) / s)^3` with `s` the sample standard deviation.
/// Fewer than three values or zero variance give 0.
pub fn skewness(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if m2 == 0.0 {
        return 0.0;
    }
    let s = libm::sqrt(m2 / (nf - 1.0));
    let cubes: f64 = values
        .iter()
        .map(|v| {
            let z = (v - mean) / s;
            z * z * z
        })
        .sum();
    nf / ((nf - 1.0) * (nf - 2.0)) * cubes
}
