//! On-disk formats: assessment manifests (TOML), EMG and motion CSV files.
//!
//! EMG files start with the header `t,<column>,...` (seconds, millivolts); motion files
//! with exactly `t,x,y,z` (seconds, meters). Row numbers in errors count data rows from 1,
//! not counting the header.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use limbscope_core::{MotionTrack, MuscleGroup, Side};
use serde::{Deserialize, Serialize};

use crate::error::IngestError;

/// Describes one assessment: which files hold it and how EMG columns map to muscles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub patient_id: String,
    pub motion_type: String,
    pub side: Side,
    pub sample_rate_hz: f64,
    /// Relative paths resolve against the manifest's directory.
    pub emg_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<VideoEntry>,
    /// Empty means the default 8-muscle catalog with auto-detected columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub muscles: Vec<MuscleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoEntry {
    pub path: String,
    #[serde(default)]
    pub offset_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuscleEntry {
    pub name: String,
    pub group: MuscleGroup,
    /// One column, or two for a bipolar pair. Empty means `<name>` or
    /// `<name>_a` + `<name>_b`, whichever the header has.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, IngestError> {
        let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::parse(&text).map_err(|message| IngestError::Manifest { file: display(path), message })
    }

    pub fn parse(text: &str) -> Result<Manifest, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_toml())
    }
}

pub(crate) fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Raw EMG table: timestamps plus named value columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgTable {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl EmgTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|(n, _)| n == name)
    }
}

fn parse_cell(file: &str, column: &str, row: usize, raw: &str) -> Result<f64, IngestError> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::InvalidValue {
            file: file.to_string(),
            column: column.to_string(),
            row,
            value: raw.to_string(),
        }),
    }
}

/// Reads an EMG CSV, checking the header, finite values, strictly increasing time and
/// spacing of `1 / sample_rate_hz` within one microsecond.
///
/// `label` is the file name used in error messages.
pub fn read_emg_csv(path: &Path, label: &str, sample_rate_hz: f64) -> Result<EmgTable, IngestError> {
    let file = fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers =
        reader.headers().map_err(|e| IngestError::Invalid { file: label.into(), message: e.to_string() })?.clone();
    if headers.get(0) != Some("t") {
        return Err(IngestError::Invalid {
            file: label.into(),
            message: format!("header must start with 't', found {:?}", headers.get(0).unwrap_or("")),
        });
    }
    let names: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let mut times = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let step = 1.0 / sample_rate_hz;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record =
            record.map_err(|e| IngestError::Invalid { file: label.into(), message: format!("row {row}: {e}") })?;
        let t = parse_cell(label, "t", row, record.get(0).unwrap_or(""))?;
        if let Some(&prev) = times.last() {
            let dt: f64 = t - prev;
            if dt <= 0.0 {
                return Err(IngestError::IrregularSampling { file: label.into(), row });
            }
            if (dt - step).abs() > limbscope_core::signal::SPACING_TOLERANCE_S {
                return Err(IngestError::RateMismatch { file: label.into(), row, spacing: dt, expected: step });
            }
        }
        times.push(t);
        for (j, name) in names.iter().enumerate() {
            let raw = record.get(j + 1).unwrap_or("");
            columns[j].push(parse_cell(label, name, row, raw)?);
        }
    }
    if times.is_empty() {
        return Err(IngestError::Invalid { file: label.into(), message: "no data rows".into() });
    }
    Ok(EmgTable { times, columns: names.into_iter().zip(columns).collect() })
}

/// Reads a motion CSV with header exactly `t,x,y,z`.
pub fn read_motion_csv(path: &Path, label: &str) -> Result<MotionTrack, IngestError> {
    let file = fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers =
        reader.headers().map_err(|e| IngestError::Invalid { file: label.into(), message: e.to_string() })?.clone();
    let expected = ["t", "x", "y", "z"];
    if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(IngestError::Invalid {
            file: label.into(),
            message: format!("header must be 't,x,y,z', found '{}'", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut track = MotionTrack::default();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record =
            record.map_err(|e| IngestError::Invalid { file: label.into(), message: format!("row {row}: {e}") })?;
        let mut cells = [0.0; 4];
        for (k, name) in expected.iter().enumerate() {
            cells[k] = parse_cell(label, name, row, record.get(k).unwrap_or(""))?;
        }
        if let Some(&prev) = track.times.last() {
            if cells[0] <= prev {
                return Err(IngestError::IrregularSampling { file: label.into(), row });
            }
        }
        track.times.push(cells[0]);
        track.positions.push([cells[1], cells[2], cells[3]]);
    }
    Ok(track)
}

/// Writes an EMG CSV with header `t,<names...>`.
pub fn write_emg_csv(path: &Path, times: &[f64], columns: &[(String, Vec<f64>)]) -> io::Result<()> {
    let mut out = String::with_capacity(times.len() * (columns.len() + 1) * 12);
    out.push('t');
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in times.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for (_, values) in columns {
            write!(out, ",{}", values[i]).unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out)
}

pub fn write_motion_csv(path: &Path, track: &MotionTrack) -> io::Result<()> {
    let mut out = String::from("t,x,y,z\n");
    for (t, p) in track.times.iter().zip(&track.positions) {
        writeln!(out, "{t},{},{},{}", p[0], p[1], p[2]).unwrap();
    }
    fs::write(path, out)
}
