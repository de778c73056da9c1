#![allow(dead_code)]

use limbscope_core::{default_catalog, Assessment, MuscleRecording, RawEmgChannel, Side};

pub const RATE: f64 = 500.0;
pub const SECONDS: f64 = 6.0;

/// Activation profile of one muscle: a baseline plus a bump whose position depends on
/// the muscle index, times `gain`.
pub fn activation(index: usize, gain: f64, t: f64) -> f64 {
    let center = 1.0 + 0.5 * index as f64;
    let bump = (-((t - center) * (t - center)) / 0.5).exp();
    gain * (0.2 + bump)
}

/// EMG-like raw signal: activation times a two-tone carrier. `phase` changes the
/// carrier without changing the activation.
pub fn raw(index: usize, gain: f64, phase: f64) -> Vec<f64> {
    let n = (SECONDS * RATE) as usize + 1;
    (0..n)
        .map(|i| {
            let t = i as f64 / RATE;
            let carrier = (2.0 * std::f64::consts::PI * 83.0 * t + phase).sin()
                + 0.5 * (2.0 * std::f64::consts::PI * 137.0 * t + 1.3 * phase).sin();
            activation(index, gain, t) * carrier
        })
        .collect()
}

/// 8-muscle assessment. `gain(name)` scales the activation and `phase(name)` the carrier.
pub fn assessment(side: Side, gain: impl Fn(&str) -> f64, phase: impl Fn(&str) -> f64) -> Assessment {
    let recs = default_catalog()
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let values = raw(i, gain(&m.name), phase(&m.name));
            MuscleRecording::single(RawEmgChannel::uniform(m, RATE, 0.0, values))
        })
        .collect();
    Assessment::new("P1", "shoulder_flexion", side, recs, None, None).unwrap()
}

pub fn identical_pair() -> (Assessment, Assessment) {
    let a = assessment(Side::Affected, |_| 1.0, |_| 0.0);
    let u = a.relabeled(Side::Unaffected);
    (a, u)
}

/// `planted` is 3x on the affected side; everything else identical across limbs.
pub fn planted_pair(planted: &str) -> (Assessment, Assessment) {
    let p = planted.to_string();
    let a = assessment(Side::Affected, move |m| if m == p { 3.0 } else { 1.0 }, |_| 0.0);
    let u = assessment(Side::Unaffected, |_| 1.0, |_| 0.0);
    (a, u)
}
