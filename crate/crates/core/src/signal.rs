//! Raw EMG channels, windowed RMS envelopes, and grid resampling.

use alloc::vec::Vec;

use crate::muscle::MuscleId;
use crate::{Error, Result};

/// Largest tolerated deviation of a sample spacing from `1 / sample_rate`.
pub const SPACING_TOLERANCE_S: f64 = 1e-6;

/// One raw EMG lead. Values oscillate about zero and may be negative.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawEmgChannel {
    pub muscle: MuscleId,
    /// Hz.
    pub sample_rate: f64,
    /// Seconds, strictly increasing.
    pub times: Vec<f64>,
    /// Millivolts.
    pub values: Vec<f64>,
}

impl RawEmgChannel {
    /// Builds a channel whose timestamps start at `t_start` and advance by `1 / sample_rate`.
    pub fn uniform(muscle: MuscleId, sample_rate: f64, t_start: f64, values: Vec<f64>) -> Self {
        let times = (0..values.len()).map(|i| t_start + i as f64 / sample_rate).collect();
        Self { muscle, sample_rate, times, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First and last timestamp.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    /// Checks that timestamps are strictly increasing and uniform at the declared rate.
    pub fn check_regular(&self) -> Result<()> {
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.times.len() != self.values.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} timestamps for {} values",
                self.times.len(),
                self.values.len()
            )));
        }
        irregular_index(&self.times, 1.0 / self.sample_rate)
            .map_or(Ok(()), |index| Err(Error::IrregularSampling { index }))
    }

    /// Samples whose timestamps fall in `[t0, t1]`.
    pub fn slice(&self, t0: f64, t1: f64) -> RawEmgChannel {
        let (lo, hi) = index_range(&self.times, t0, t1);
        RawEmgChannel {
            muscle: self.muscle.clone(),
            sample_rate: self.sample_rate,
            times: self.times[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        }
    }
}

/// Index of the first sample that breaks uniform spacing, if any.
pub(crate) fn irregular_index(times: &[f64], step: f64) -> Option<usize> {
    times
        .windows(2)
        .position(|w| {
            let dt = w[1] - w[0];
            dt.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) || (dt - step).abs() > SPACING_TOLERANCE_S
        })
        .map(|i| i + 1)
}

/// Half-open index range of `times` inside the closed interval `[t0, t1]`, with a
/// nanosecond slack so grid points computed by different routes still land inside.
pub(crate) fn index_range(times: &[f64], t0: f64, t1: f64) -> (usize, usize) {
    const SLACK: f64 = 1e-9;
    let lo = times.partition_point(|&t| t < t0 - SLACK);
    let hi = times.partition_point(|&t| t <= t1 + SLACK);
    (lo, hi.max(lo))
}

/// Non-negative RMS-transformed activity series, uniformly spaced at `hop_s`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Envelope {
    pub muscle: MuscleId,
    /// Window centers, seconds.
    pub times: Vec<f64>,
    /// Millivolts RMS.
    pub values: Vec<f64>,
    pub window_s: f64,
    pub hop_s: f64,
}

impl Envelope {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Pointwise mean of envelopes computed on the same time base
    /// (the two leads of a bipolar pair).
    pub fn mean_of(envelopes: &[Envelope]) -> Result<Envelope> {
        let (first, rest) = envelopes.split_first().ok_or(Error::EmptyInput("no envelopes to average"))?;
        if rest.iter().any(|e| e.len() != first.len()) {
            return Err(Error::InvalidParameter("paired leads produced envelopes of different lengths".into()));
        }
        if rest.is_empty() {
            return Ok(first.clone());
        }
        let n = envelopes.len() as f64;
        let values = (0..first.len()).map(|k| envelopes.iter().map(|e| e.values[k]).sum::<f64>() / n).collect();
        Ok(Envelope { values, ..first.clone() })
    }
}

/// Windowed RMS envelope of one raw channel.
///
/// The window spans `S = round(window_s * sample_rate)` samples. Window `k` starts at
/// sample `round(k * hop_s * sample_rate)` and its output time is the nominal window
/// center `t_first + (S - 1) / (2 * sample_rate) + k * hop_s`, so outputs are spaced
/// exactly `hop_s` apart.
pub fn rms_envelope(channel: &RawEmgChannel, window_s: f64, hop_s: f64) -> Result<Envelope> {
    if !(window_s.is_finite() && window_s > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("window_s must be > 0, got {window_s}")));
    }
    if !(hop_s.is_finite() && hop_s > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("hop_s must be > 0, got {hop_s}")));
    }
    channel.check_regular()?;

    let rate = channel.sample_rate;
    let window = (libm::round(window_s * rate) as usize).max(1);
    let n = channel.len();
    if n < window {
        return Err(Error::WindowExceedsRecording { window_samples: window, available: n });
    }

    let t_first = channel.times[0];
    let center_offset = (window - 1) as f64 / (2.0 * rate);
    let hop_samples = hop_s * rate;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for k in 0usize.. {
        let start = libm::round(k as f64 * hop_samples) as usize;
        if start + window > n {
            break;
        }
        let sum_sq: f64 = channel.values[start..start + window].iter().map(|v| v * v).sum();
        times.push(t_first + center_offset + k as f64 * hop_s);
        values.push(libm::sqrt(sum_sq / window as f64));
    }

    Ok(Envelope { muscle: channel.muscle.clone(), times, values, window_s, hop_s })
}

/// Linear interpolation of an envelope onto a uniform grid at `rate` Hz starting at its
/// first timestamp. Output values are clamped at zero.
pub fn resample_to_grid(envelope: &Envelope, rate: f64) -> Result<Envelope> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("rate must be > 0, got {rate}")));
    }
    let (&t_first, &t_last) = match (envelope.times.first(), envelope.times.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EmptyInput("envelope")),
    };
    let count = libm::floor((t_last - t_first) * rate + 1e-9) as usize + 1;
    let times: Vec<f64> = (0..count).map(|j| t_first + j as f64 / rate).collect();
    let values = times.iter().map(|&t| interpolate(&envelope.times, &envelope.values, t).max(0.0)).collect();
    Ok(Envelope { muscle: envelope.muscle.clone(), times, values, window_s: envelope.window_s, hop_s: 1.0 / rate })
}

/// Piecewise-linear value at `t`, held constant beyond either end.
pub(crate) fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t <= times[0] {
        return values[0];
    }
    if t >= times[n - 1] {
        return values[n - 1];
    }
    let hi = times.partition_point(|&x| x <= t);
    let lo = hi - 1;
    let span = times[hi] - times[lo];
    let frac = (t - times[lo]) / span;
    values[lo] + frac * (values[hi] - values[lo])
}
