mod common;

use std::fs;

use common::{small_spec, Env};
use limbscope::fixtures::{self, FixtureKind};
use limbscope::formats::{Manifest, MuscleEntry};
use limbscope::ingest::{ingest, validate, ResolvedManifest};
use limbscope::IngestError;
use limbscope_core::{MuscleGroup, Side};

fn fixture_dir() -> (tempfile::TempDir, Vec<std::path::PathBuf>) {
    let dir = tempfile::tempdir().unwrap();
    let manifests = fixtures::write(&small_spec(FixtureKind::Clinical, "P1"), dir.path()).unwrap();
    (dir, manifests)
}

fn ingest_path(p: &std::path::Path) -> Result<limbscope::ingest::Ingested, IngestError> {
    ingest(&ResolvedManifest::load(p)?)
}

#[test]
fn well_formed_fixture_has_eight_paired_muscles() {
    let (_dir, manifests) = fixture_dir();
    let ing = ingest_path(&manifests[0]).unwrap();
    let a = &ing.assessment;
    assert_eq!(a.side, Side::Affected);
    assert_eq!(a.muscles.len(), 8);
    assert!(a.muscles.values().all(|r| r.leads.len() == 2));
    assert_eq!(a.sample_rate(), 500.0);
    assert_eq!(a.video.as_ref().unwrap().offset_s, 0.5);
    assert!(a.motion.is_some());
    assert_eq!(ing.fingerprint.len(), 64);
    assert_eq!(ingest_path(&manifests[0]).unwrap().fingerprint, ing.fingerprint);
}

fn rewrite_emg(manifest: &std::path::Path, edit: impl Fn(usize, &str) -> String) {
    let emg = manifest.parent().unwrap().join("emg.csv");
    let text = fs::read_to_string(&emg).unwrap();
    let out: Vec<String> = text.lines().enumerate().map(|(i, l)| edit(i, l)).collect();
    fs::write(&emg, out.join("\n") + "\n").unwrap();
}

#[test]
fn time_regression_names_file_and_row() {
    let (_dir, manifests) = fixture_dir();
    // Line 512 of the file is data row 512; give it the timestamp of row 510.
    rewrite_emg(&manifests[0], |i, l| {
        if i == 512 {
            let rest = l.split_once(',').unwrap().1;
            format!("{},{rest}", 509.0 / 500.0)
        } else {
            l.to_string()
        }
    });
    let err = ingest_path(&manifests[0]).unwrap_err();
    assert_eq!(err.to_string(), "irregular sampling: emg.csv row 512");
}

#[test]
fn missing_mapped_column_is_named() {
    let (_dir, manifests) = fixture_dir();
    let mut m = Manifest::load(&manifests[0]).unwrap();
    m.muscles = vec![
        MuscleEntry { name: "BIC".into(), group: MuscleGroup::Pushing, columns: vec!["BIC_a".into(), "BIC_b".into()] },
        MuscleEntry { name: "TRI".into(), group: MuscleGroup::Pushing, columns: vec!["TRI_x".into()] },
    ];
    m.save(&manifests[0]).unwrap();
    let err = ingest_path(&manifests[0]).unwrap_err();
    assert!(matches!(&err, IngestError::MissingColumn { column, .. } if column == "TRI_x"), "{err}");
    assert!(err.to_string().contains("TRI_x"));
}

#[test]
fn auto_detected_column_missing_is_named() {
    let (_dir, manifests) = fixture_dir();
    rewrite_emg(&manifests[0], |i, l| if i == 0 { l.replace("EDC_b", "XYZ_b") } else { l.to_string() });
    let err = ingest_path(&manifests[0]).unwrap_err();
    assert_eq!(err.to_string(), "missing column 'EDC_b' in emg.csv");
}

#[test]
fn nan_and_rate_mismatch_are_rejected() {
    let (_dir, manifests) = fixture_dir();
    rewrite_emg(&manifests[0], |i, l| {
        if i == 40 {
            let mut cells: Vec<&str> = l.split(',').collect();
            cells[3] = "NaN";
            cells.join(",")
        } else {
            l.to_string()
        }
    });
    let err = ingest_path(&manifests[0]).unwrap_err();
    assert_eq!(err.to_string(), "invalid value in emg.csv column 'TRI_a' row 40: NaN");

    let mut m = Manifest::load(&manifests[1]).unwrap();
    m.sample_rate_hz = 1000.0;
    m.save(&manifests[1]).unwrap();
    let err = ingest_path(&manifests[1]).unwrap_err();
    assert!(matches!(err, IngestError::RateMismatch { row: 2, .. }), "{err}");
}

#[test]
fn single_column_layout_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["BIC", "TRI", "PT", "PQ", "UT", "LT", "FDS", "EDC"];
    let times: Vec<f64> = (0..200).map(|i| i as f64 / 100.0).collect();
    let cols: Vec<(String, Vec<f64>)> = names
        .iter()
        .enumerate()
        .map(|(k, n)| (n.to_string(), times.iter().map(|t| ((k + 1) as f64 * t).sin()).collect()))
        .collect();
    limbscope::formats::write_emg_csv(&dir.path().join("emg.csv"), &times, &cols).unwrap();
    let path = dir.path().join("m.toml");
    fs::write(
        &path,
        "patient_id = \"P9\"\nmotion_type = \"abduction\"\nside = \"unaffected\"\nsample_rate_hz = 100.0\nemg_path = \"emg.csv\"\n",
    )
    .unwrap();
    let a = ingest_path(&path).unwrap().assessment;
    assert_eq!(a.muscles.len(), 8);
    assert!(a.muscles.values().all(|r| r.leads.len() == 1));
    assert!(a.motion.is_none() && a.video.is_none());
}

#[test]
fn validate_reports_per_file() {
    let (_dir, manifests) = fixture_dir();
    let report = validate(&manifests[0]);
    assert!(report.ok(), "{report:?}");
    assert!(report.findings.len() >= 3);

    rewrite_emg(&manifests[1], |i, l| if i == 7 { l.replacen("0.012", "0.010", 1) } else { l.to_string() });
    let report = validate(&manifests[1]);
    assert!(!report.ok());
    assert!(report.findings.iter().any(|f| !f.ok && f.message.contains("row 7")), "{report:?}");

    let report = validate(&manifests[0].with_file_name("absent.toml"));
    assert!(!report.ok());
}

#[test]
fn reingesting_replaces_the_entry() {
    let env = Env::new();
    let manifests = env.fixture(&small_spec(FixtureKind::Planted, "P2"));
    let before = env.store.catalog().unwrap();
    let entry = env.store.ingest_manifest(&manifests[0]).unwrap();
    let after = env.store.catalog().unwrap();
    assert_eq!(before.len(), 2);
    assert_eq!(before, after);
    assert!(after.contains(&entry));
}
