//! Share of total muscle activity inside a brushed interval.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::assessment::{Interval, Side};
use crate::signal::{interpolate, Envelope};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProportionSummary {
    pub side: Side,
    pub interval: Interval,
    /// Muscle name to fraction of the summed activity. Muted muscles are absent.
    pub shares: BTreeMap<String, f64>,
}

impl ProportionSummary {
    pub fn percentages(&self) -> impl Iterator<Item = (&str, f64)> {
        self.shares.iter().map(|(k, v)| (k.as_str(), v * 100.0))
    }
}

/// Trapezoidal integral of the piecewise-linear envelope over `interval` clipped to the
/// envelope's domain. `None` when they do not overlap.
pub fn integrate(envelope: &Envelope, interval: Interval) -> Option<f64> {
    let (&first, &last) = (envelope.times.first()?, envelope.times.last()?);
    let lo = interval.t0.max(first);
    let hi = interval.t1.min(last);
    if lo > hi {
        return None;
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    points.push((lo, interpolate(&envelope.times, &envelope.values, lo)));
    points
        .extend(envelope.times.iter().zip(&envelope.values).filter(|(&t, _)| t > lo && t < hi).map(|(&t, &v)| (t, v)));
    if hi > lo {
        points.push((hi, interpolate(&envelope.times, &envelope.values, hi)));
    }
    Some(points.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum())
}

/// Each non-muted muscle's integral over `interval` divided by the sum over all
/// non-muted muscles.
pub fn proportion_summary(
    envelopes: &BTreeMap<String, Envelope>,
    interval: Interval,
    muted: &BTreeSet<String>,
    side: Side,
) -> Result<ProportionSummary> {
    if interval.t0.partial_cmp(&interval.t1) != Some(core::cmp::Ordering::Less) {
        return Err(Error::InvalidParameter(alloc::format!(
            "interval [{}, {}] is empty or inverted",
            interval.t0,
            interval.t1
        )));
    }
    let integrals: Vec<(&String, f64)> = envelopes
        .iter()
        .filter(|(name, _)| !muted.contains(*name))
        .filter_map(|(name, env)| integrate(env, interval).map(|a| (name, a)))
        .collect();
    if integrals.is_empty() {
        return Err(Error::InvalidParameter("interval does not overlap any non-muted envelope".into()));
    }
    let total: f64 = integrals.iter().map(|(_, a)| a).sum();
    if total.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
        return Err(Error::NoActivityInInterval);
    }
    let shares = integrals.into_iter().map(|(name, a)| (name.clone(), a / total)).collect();
    Ok(ProportionSummary { side, interval, shares })
}
