//! Seeded synthetic datasets: 16 paired EMG channels (8 muscles), a motion track and a
//! video reference per side.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use limbscope_core::{default_catalog, Assessment, MotionTrack, MuscleRecording, RawEmgChannel, Side, VideoRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::formats::{write_emg_csv, write_motion_csv, Manifest, VideoEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    /// Both sides carry the same recording.
    Identical,
    /// One muscle at 3x amplitude on the affected side, everything else identical.
    Planted,
    /// Biceps and triceps elevated on the affected side, other muscles close to
    /// symmetric with independent noise and a reduced range of motion.
    Clinical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    pub seed: u64,
    pub patient_id: String,
    pub motion_type: String,
    pub planted: String,
    pub sample_rate_hz: f64,
    pub seconds: f64,
    pub motion_rate_hz: f64,
    pub video_offset_s: f64,
}

impl FixtureSpec {
    pub fn new(kind: FixtureKind, patient_id: impl Into<String>) -> Self {
        FixtureSpec {
            kind,
            seed: 7,
            patient_id: patient_id.into(),
            motion_type: "shoulder_flexion".into(),
            planted: "BIC".into(),
            sample_rate_hz: 1000.0,
            seconds: 15.0,
            motion_rate_hz: 100.0,
            video_offset_s: 0.5,
        }
    }
}

const WEIGHTS: [f64; 8] = [1.0, 0.8, 0.5, 0.4, 0.7, 0.6, 0.3, 0.35];

fn gain(spec: &FixtureSpec, side: Side, index: usize, name: &str) -> f64 {
    if side == Side::Unaffected {
        return 1.0;
    }
    match spec.kind {
        FixtureKind::Identical => 1.0,
        FixtureKind::Planted => {
            if name == spec.planted {
                3.0
            } else {
                1.0
            }
        }
        FixtureKind::Clinical => match name {
            "BIC" => 2.4,
            "TRI" => 2.0,
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(31).wrapping_add(index as u64));
                Uniform::new(0.92, 1.08).expect("valid range").sample(&mut rng)
            }
        },
    }
}

fn noise_seed(spec: &FixtureSpec, side: Side, index: usize, lead: usize) -> u64 {
    let salt = match (spec.kind, side) {
        (FixtureKind::Clinical, Side::Affected) => 0x5eed_0001,
        _ => 0,
    };
    spec.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add((index as u64) << 8 | lead as u64) ^ salt
}

fn activation(index: usize, t: f64) -> f64 {
    let phase = (2.0 * std::f64::consts::PI * t / 7.5 - 0.4 * index as f64).sin();
    let s = 0.5 + 0.5 * phase;
    0.04 + WEIGHTS[index] * s * s
}

fn sample_count(spec: &FixtureSpec) -> usize {
    (spec.seconds * spec.sample_rate_hz).round() as usize + 1
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Raw EMG columns `<muscle>_a`, `<muscle>_b` for one side, in catalog order.
pub fn emg_columns(spec: &FixtureSpec, side: Side) -> (Vec<f64>, Vec<(String, Vec<f64>)>) {
    let n = sample_count(spec);
    let times: Vec<f64> = (0..n).map(|i| i as f64 / spec.sample_rate_hz).collect();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut columns = Vec::with_capacity(16);
    for (index, muscle) in default_catalog().iter().enumerate() {
        let g = gain(spec, side, index, &muscle.name);
        for (lead, suffix) in ["a", "b"].iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed(spec, side, index, lead));
            let values = times.iter().map(|&t| round6(g * activation(index, t) * normal.sample(&mut rng))).collect();
            columns.push((format!("{}_{suffix}", muscle.name), values));
        }
    }
    (times, columns)
}

/// Arm raised and lowered twice; the affected arm of the clinical fixture reaches 70%
/// of the range.
pub fn motion_track(spec: &FixtureSpec, side: Side) -> MotionTrack {
    let range = if spec.kind == FixtureKind::Clinical && side == Side::Affected { 0.7 } else { 1.0 };
    let n = (spec.seconds * spec.motion_rate_hz).round() as usize + 1;
    let mut track = MotionTrack::default();
    for j in 0..n {
        let t = j as f64 / spec.motion_rate_hz;
        let s = (std::f64::consts::PI * t / 7.5).sin();
        let theta = range * std::f64::consts::FRAC_PI_2 * s * s;
        track.times.push(t);
        track.positions.push([0.0, round6(0.6 * theta.sin()), round6(1.2 - 0.6 * theta.cos())]);
    }
    track
}

fn video(spec: &FixtureSpec, side: Side) -> VideoRef {
    VideoRef { path: format!("video/{side}.mp4"), offset_s: spec.video_offset_s }
}

/// The fixture for one side, built in memory.
pub fn assessment(spec: &FixtureSpec, side: Side) -> Assessment {
    let (times, columns) = emg_columns(spec, side);
    let recordings = default_catalog()
        .into_iter()
        .enumerate()
        .map(|(index, muscle)| MuscleRecording {
            leads: columns[2 * index..2 * index + 2]
                .iter()
                .map(|(_, values)| RawEmgChannel {
                    muscle: muscle.clone(),
                    sample_rate: spec.sample_rate_hz,
                    times: times.clone(),
                    values: values.clone(),
                })
                .collect(),
            muscle,
        })
        .collect();
    Assessment::new(
        spec.patient_id.clone(),
        spec.motion_type.clone(),
        side,
        recordings,
        Some(motion_track(spec, side)),
        Some(video(spec, side)),
    )
    .expect("fixture is well formed")
}

/// Writes `<root>/<patient>/<motion>/<side>/{manifest.toml, emg.csv, motion.csv}` for
/// both sides and returns the manifest paths, affected first.
pub fn write(spec: &FixtureSpec, root: &Path) -> io::Result<Vec<PathBuf>> {
    let mut manifests = Vec::new();
    for side in Side::BOTH {
        let dir = root.join(&spec.patient_id).join(&spec.motion_type).join(side.as_str());
        fs::create_dir_all(&dir)?;
        let (times, columns) = emg_columns(spec, side);
        write_emg_csv(&dir.join("emg.csv"), &times, &columns)?;
        write_motion_csv(&dir.join("motion.csv"), &motion_track(spec, side))?;
        let v = video(spec, side);
        let manifest = Manifest {
            patient_id: spec.patient_id.clone(),
            motion_type: spec.motion_type.clone(),
            side,
            sample_rate_hz: spec.sample_rate_hz,
            emg_path: "emg.csv".into(),
            motion_path: Some("motion.csv".into()),
            video: Some(VideoEntry { path: v.path, offset_s: v.offset_s }),
            muscles: Vec::new(),
        };
        let path = dir.join("manifest.toml");
        manifest.save(&path)?;
        manifests.push(path);
    }
    Ok(manifests)
}
