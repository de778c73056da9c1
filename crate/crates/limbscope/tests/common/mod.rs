#![allow(dead_code)]

use std::path::PathBuf;

use limbscope::fixtures::{self, FixtureKind, FixtureSpec};
use limbscope::ingest::Ingested;
use limbscope::DocumentStore;
use limbscope_core::{default_catalog, Assessment, MuscleRecording, RawEmgChannel, Side, VideoRef};
use tempfile::TempDir;

/// Shorter and slower-sampled than the default fixture so tests stay quick.
pub fn small_spec(kind: FixtureKind, patient: &str) -> FixtureSpec {
    let mut spec = FixtureSpec::new(kind, patient);
    spec.seconds = 4.0;
    spec.sample_rate_hz = 500.0;
    spec.motion_rate_hz = 50.0;
    spec
}

pub struct Env {
    pub dir: TempDir,
    pub store: DocumentStore,
}

impl Env {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = DocumentStore::open(dir.path().join("data")).unwrap();
        Env { dir, store }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.dir.path().join("data")
    }

    /// Writes the fixture files and ingests both sides.
    pub fn fixture(&self, spec: &FixtureSpec) -> Vec<PathBuf> {
        let manifests = fixtures::write(spec, &self.dir.path().join("fixtures")).unwrap();
        for m in &manifests {
            self.store.ingest_manifest(m).unwrap();
        }
        manifests
    }

    pub fn put(&self, a: Assessment) {
        let fingerprint = format!("{:x}", a.muscles.len() * 7919 + a.patient_id.len());
        self.store.put_assessment(&Ingested { assessment: a, fingerprint, manifest_path: None }).unwrap();
    }
}

/// All 8 muscles carry the same constant-amplitude square wave.
pub fn uniform_assessment(patient: &str, side: Side, video: Option<VideoRef>) -> Assessment {
    let rate = 200.0;
    let values: Vec<f64> = (0..801).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let recs = default_catalog()
        .into_iter()
        .map(|m| MuscleRecording::single(RawEmgChannel::uniform(m, rate, 0.0, values.clone())))
        .collect();
    Assessment::new(patient, "shoulder_flexion", side, recs, None, video).unwrap()
}

/// A one-muscle, 20-sample assessment for catalog tests.
pub fn tiny_assessment(patient: &str, motion: &str, side: Side) -> Assessment {
    let m = default_catalog().remove(0);
    let values: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
    Assessment::new(
        patient,
        motion,
        side,
        vec![MuscleRecording::single(RawEmgChannel::uniform(m, 10.0, 0.0, values))],
        None,
        None,
    )
    .unwrap()
}
