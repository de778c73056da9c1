//! Manifest-driven ingestion: reads and validates the files a manifest names and
//! builds an [`Assessment`].

use std::fs;
use std::path::{Path, PathBuf};

use limbscope_core::{default_catalog, Assessment, MuscleId, MuscleRecording, RawEmgChannel, VideoRef};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::IngestError;
use crate::formats::{read_emg_csv, read_motion_csv, EmgTable, Manifest};

/// A manifest whose relative paths have been resolved against its directory.
#[derive(Debug, Clone)]
pub struct ResolvedManifest {
    pub manifest: Manifest,
    pub source: Option<PathBuf>,
    pub emg_path: PathBuf,
    pub motion_path: Option<PathBuf>,
}

impl ResolvedManifest {
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let manifest = Manifest::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(Self::resolve(manifest, base, Some(path.to_path_buf())))
    }

    pub fn resolve(manifest: Manifest, base: &Path, source: Option<PathBuf>) -> Self {
        let emg_path = base.join(&manifest.emg_path);
        let motion_path = manifest.motion_path.as_ref().map(|p| base.join(p));
        ResolvedManifest { manifest, source, emg_path, motion_path }
    }

    fn video_path(&self) -> Option<PathBuf> {
        let video = self.manifest.video.as_ref()?;
        let p = Path::new(&video.path);
        Some(match (&self.source, p.is_relative()) {
            (Some(src), true) => src.parent().unwrap_or(Path::new(".")).join(p),
            _ => p.to_path_buf(),
        })
    }
}

/// A successfully ingested assessment with the hash of everything it was built from.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub assessment: Assessment,
    pub fingerprint: String,
    pub manifest_path: Option<PathBuf>,
}

fn label(path: &Path) -> String {
    path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn resolve_columns(
    table: &EmgTable,
    muscle: &MuscleId,
    explicit: &[String],
    file: &str,
) -> Result<Vec<String>, IngestError> {
    let missing = |column: String| IngestError::MissingColumn { file: file.to_string(), column };
    if !explicit.is_empty() {
        if explicit.len() > 2 {
            return Err(IngestError::Invalid {
                file: file.to_string(),
                message: format!("muscle {} maps {} columns, expected 1 or 2", muscle.name, explicit.len()),
            });
        }
        for c in explicit {
            if !table.has_column(c) {
                return Err(missing(c.clone()));
            }
        }
        return Ok(explicit.to_vec());
    }
    if table.has_column(&muscle.name) {
        return Ok(vec![muscle.name.clone()]);
    }
    let (a, b) = (format!("{}_a", muscle.name), format!("{}_b", muscle.name));
    match (table.has_column(&a), table.has_column(&b)) {
        (true, true) => Ok(vec![a, b]),
        (true, false) => Err(missing(b)),
        _ => Err(missing(muscle.name.clone())),
    }
}

/// Reads, validates and assembles the assessment a manifest describes.
pub fn ingest(resolved: &ResolvedManifest) -> Result<Ingested, IngestError> {
    let m = &resolved.manifest;
    let manifest_label = resolved.source.as_deref().map(label).unwrap_or_else(|| "manifest".into());
    let invalid = |message: String| IngestError::Manifest { file: manifest_label.clone(), message };
    if !(m.sample_rate_hz.is_finite() && m.sample_rate_hz > 0.0) {
        return Err(invalid(format!("sample_rate_hz must be positive, got {}", m.sample_rate_hz)));
    }
    if m.patient_id.trim().is_empty() || m.motion_type.trim().is_empty() {
        return Err(invalid("patient_id and motion_type must be non-empty".into()));
    }

    let emg_label = label(&resolved.emg_path);
    let table = read_emg_csv(&resolved.emg_path, &emg_label, m.sample_rate_hz)?;

    let catalog: Vec<(MuscleId, Vec<String>)> = if m.muscles.is_empty() {
        default_catalog().into_iter().map(|id| (id, Vec::new())).collect()
    } else {
        m.muscles.iter().map(|e| (MuscleId::new(e.name.clone(), e.group), e.columns.clone())).collect()
    };
    let mut recordings = Vec::with_capacity(catalog.len());
    for (muscle, explicit) in catalog {
        let columns = resolve_columns(&table, &muscle, &explicit, &emg_label)?;
        let leads = columns
            .iter()
            .map(|c| RawEmgChannel {
                muscle: muscle.clone(),
                sample_rate: m.sample_rate_hz,
                times: table.times.clone(),
                values: table.column(c).expect("column checked").to_vec(),
            })
            .collect();
        recordings.push(MuscleRecording { muscle, leads });
    }

    let (motion, motion_bytes) = match &resolved.motion_path {
        Some(p) => (Some(read_motion_csv(p, &label(p))?), fs::read(p).map_err(|e| IngestError::io(p, e))?),
        None => (None, Vec::new()),
    };
    let video = m.video.as_ref().map(|v| VideoRef { path: v.path.clone(), offset_s: v.offset_s });

    let assessment = Assessment::new(m.patient_id.clone(), m.motion_type.clone(), m.side, recordings, motion, video)
        .map_err(|e| invalid(e.to_string()))?;

    let mut hasher = Sha256::new();
    hasher.update(m.to_toml().as_bytes());
    hasher.update([0u8]);
    hasher.update(fs::read(&resolved.emg_path).map_err(|e| IngestError::io(&resolved.emg_path, e))?);
    hasher.update([0u8]);
    hasher.update(&motion_bytes);
    Ok(Ingested { assessment, fingerprint: hex::encode(hasher.finalize()), manifest_path: resolved.source.clone() })
}

/// One line of a validation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub file: String,
    pub ok: bool,
    /// Passing, but worth a look.
    #[serde(default)]
    pub warning: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.findings.iter().all(|f| f.ok)
    }
}

/// Checks every file a manifest references without touching the catalog.
///
/// A missing video file is reported but does not fail validation; video is only ever
/// referenced by path.
pub fn validate(manifest_path: &Path) -> ValidationReport {
    let mut findings = Vec::new();
    let manifest_label = manifest_path.display().to_string();
    let resolved = match ResolvedManifest::load(manifest_path) {
        Ok(r) => r,
        Err(e) => {
            findings.push(Finding { file: manifest_label, ok: false, warning: false, message: e.to_string() });
            return ValidationReport { findings };
        }
    };
    findings.push(Finding { file: manifest_label, ok: true, warning: false, message: "manifest parsed".into() });
    match ingest(&resolved) {
        Ok(ing) => {
            let a = &ing.assessment;
            let leads: usize = a.muscles.values().map(|r| r.leads.len()).sum();
            let b = a.bounds();
            findings.push(Finding {
                file: resolved.emg_path.display().to_string(),
                ok: true,
                warning: false,
                message: format!(
                    "{} muscles from {} channels at {} Hz, {} to {} s",
                    a.muscles.len(),
                    leads,
                    a.sample_rate(),
                    b.t0,
                    b.t1
                ),
            });
            if let (Some(p), Some(track)) = (&resolved.motion_path, &a.motion) {
                findings.push(Finding {
                    file: p.display().to_string(),
                    ok: true,
                    warning: false,
                    message: format!("{} motion samples", track.times.len()),
                });
            }
        }
        Err(e) => {
            let file = match &e {
                IngestError::Io { file, .. } => file.clone(),
                IngestError::Manifest { file, .. }
                | IngestError::MissingColumn { file, .. }
                | IngestError::IrregularSampling { file, .. }
                | IngestError::RateMismatch { file, .. }
                | IngestError::InvalidValue { file, .. }
                | IngestError::Invalid { file, .. } => file.clone(),
            };
            findings.push(Finding { file, ok: false, warning: false, message: e.to_string() });
        }
    }
    if let Some(video) = resolved.video_path() {
        let exists = video.exists();
        findings.push(Finding {
            file: video.display().to_string(),
            ok: true,
            warning: !exists,
            message: if exists { "video referenced".into() } else { "video referenced but not found".into() },
        });
    }
    ValidationReport { findings }
}
