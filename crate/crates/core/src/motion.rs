//! Limb position tracks and the derived speed, acceleration and displacement series.

use alloc::vec::Vec;

use crate::signal::index_range;
use crate::{Error, Result};

/// Positions in meters at strictly increasing times in seconds.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotionTrack {
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
}

/// A scalar time series.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Series {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl MotionTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn check_monotonic(&self) -> Result<()> {
        if self.times.len() != self.positions.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} timestamps for {} positions",
                self.times.len(),
                self.positions.len()
            )));
        }
        match self.times.windows(2).position(|w| w[1].is_nan() || w[1] <= w[0]) {
            Some(i) => Err(Error::IrregularSampling { index: i + 1 }),
            None => Ok(()),
        }
    }

    pub fn slice(&self, t0: f64, t1: f64) -> MotionTrack {
        let (lo, hi) = index_range(&self.times, t0, t1);
        MotionTrack { times: self.times[lo..hi].to_vec(), positions: self.positions[lo..hi].to_vec() }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm(a: [f64; 3]) -> f64 {
    libm::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
}

fn require(track: &MotionTrack, needed: usize) -> Result<()> {
    if track.len() < needed {
        return Err(Error::TrackTooShort { needed, got: track.len() });
    }
    track.check_monotonic()
}

/// Magnitude of the velocity: central differences inside, one-sided at both ends.
pub fn derive_speed(track: &MotionTrack) -> Result<Series> {
    require(track, 2)?;
    let t = &track.times;
    let p = &track.positions;
    let n = t.len();
    let values = (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            norm(sub(p[b], p[a])) / (t[b] - t[a])
        })
        .collect();
    Ok(Series { times: t.clone(), values })
}

/// Second-difference acceleration at the middle of three samples, exact for quadratics
/// on non-uniform spacing.
fn second_difference(t: &[f64], p: &[[f64; 3]], i: usize) -> f64 {
    let h1 = t[i] - t[i - 1];
    let h2 = t[i + 1] - t[i];
    let forward = scale(sub(p[i + 1], p[i]), 1.0 / h2);
    let backward = scale(sub(p[i], p[i - 1]), 1.0 / h1);
    norm(scale(sub(forward, backward), 2.0 / (h1 + h2)))
}

/// Magnitude of the acceleration. Endpoints reuse the one-sided three-point stencil of
/// their neighbor; a two-sample track has no curvature and yields zeros.
pub fn derive_acceleration(track: &MotionTrack) -> Result<Series> {
    require(track, 2)?;
    let t = &track.times;
    let p = &track.positions;
    let n = t.len();
    let values =
        if n == 2 { alloc::vec![0.0; 2] } else { (0..n).map(|i| second_difference(t, p, i.clamp(1, n - 2))).collect() };
    Ok(Series { times: t.clone(), values })
}

/// Euclidean distance of every sample from the track's first position. Slice the track
/// to the retained interval first so the origin is the interval start.
pub fn derive_displacement(track: &MotionTrack) -> Result<Series> {
    require(track, 1)?;
    let origin = track.positions[0];
    let values = track.positions.iter().map(|&q| norm(sub(q, origin))).collect();
    Ok(Series { times: track.times.clone(), values })
}
