//! Analyst sessions and presentation documents.

use std::collections::BTreeSet;

use limbscope_core::{Interval, ProportionSummary, Side};
use serde::{Deserialize, Serialize};

use crate::error::StoreError;
use crate::render;
use crate::store::{check_id, DocumentStore, PRESENTATIONS, SESSIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub patient_id: String,
    pub motion_type: String,
    pub side: Side,
    pub interval: Interval,
}

/// Per-comparison analyst state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonState {
    pub patient_id: String,
    pub motion_type: String,
    #[serde(default)]
    pub muted: BTreeSet<String>,
    #[serde(default)]
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Brush {
    pub id: String,
    pub patient_id: String,
    pub motion_type: String,
    pub side: Side,
    pub interval: Interval,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub id: String,
    #[serde(default)]
    pub owner: String,
    #[serde(default)]
    pub truncations: Vec<Truncation>,
    #[serde(default)]
    pub comparisons: Vec<ComparisonState>,
    #[serde(default)]
    pub brushes: Vec<Brush>,
    /// Milliseconds since the Unix epoch, as supplied by the client.
    #[serde(default)]
    pub created_ms: u64,
    #[serde(default)]
    pub modified_ms: u64,
}

impl Session {
    pub fn new(id: impl Into<String>, owner: impl Into<String>) -> Self {
        Session {
            id: id.into(),
            owner: owner.into(),
            truncations: Vec::new(),
            comparisons: Vec::new(),
            brushes: Vec::new(),
            created_ms: 0,
            modified_ms: 0,
        }
    }

    pub fn brush(&self, id: &str) -> Option<&Brush> {
        self.brushes.iter().find(|b| b.id == id)
    }

    /// Retained interval of an assessment under this session's truncations.
    pub fn truncation(&self, patient_id: &str, motion_type: &str, side: Side) -> Option<Interval> {
        self.truncations
            .iter()
            .find(|t| t.patient_id == patient_id && t.motion_type == motion_type && t.side == side)
            .map(|t| t.interval)
    }

    pub fn comparison(&self, patient_id: &str, motion_type: &str) -> Option<&ComparisonState> {
        self.comparisons.iter().find(|c| c.patient_id == patient_id && c.motion_type == motion_type)
    }
}

/// Points a presentation cell at a brush saved in a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrushRef {
    pub session_id: String,
    pub brush_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    /// Patient label of the grid row.
    pub row: String,
    /// Finding group of the grid column.
    pub column: String,
    pub brush: BrushRef,
    /// Frozen copy taken when the cell was created.
    pub snapshot: ProportionSummary,
    #[serde(default)]
    pub annotation: String,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("({}, {})", self.row, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationDoc {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub subtitle: String,
    #[serde(default)]
    pub rows: Vec<String>,
    #[serde(default)]
    pub columns: Vec<String>,
    #[serde(default)]
    pub cells: Vec<Cell>,
}

impl PresentationDoc {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        PresentationDoc {
            id: id.into(),
            title: title.into(),
            subtitle: String::new(),
            rows: Vec::new(),
            columns: Vec::new(),
            cells: Vec::new(),
        }
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row && c.column == column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    /// Canonical JSON document.
    Document,
    /// Self-contained SVG page.
    StaticRender,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "document" => Some(ExportFormat::Document),
            "static-render" => Some(ExportFormat::StaticRender),
            _ => None,
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Document => "application/json",
            ExportFormat::StaticRender => "image/svg+xml",
        }
    }
}

fn invalid(kind: &'static str, message: String) -> StoreError {
    StoreError::invalid(kind, message)
}

fn check_interval(kind: &'static str, what: &str, i: &Interval, bounds: &Interval) -> Result<(), StoreError> {
    if i.t0.partial_cmp(&i.t1) != Some(std::cmp::Ordering::Less) || i.t0 < bounds.t0 - 1e-9 || i.t1 > bounds.t1 + 1e-9 {
        return Err(invalid(kind, format!("{what} [{}, {}] is outside [{}, {}]", i.t0, i.t1, bounds.t0, bounds.t1)));
    }
    Ok(())
}

impl DocumentStore {
    /// Checks a session against the catalog: every referenced assessment exists, every
    /// tau is in [0, 1], truncations sit inside the recording and brushes inside the
    /// retained interval.
    pub fn validate_session(&self, s: &Session) -> Result<(), StoreError> {
        const KIND: &str = "session";
        check_id(&s.id)?;
        for t in &s.truncations {
            let entry = self.entry(&t.patient_id, &t.motion_type, t.side)?;
            check_interval(KIND, "truncation", &t.interval, &entry.bounds)?;
        }
        for c in &s.comparisons {
            if !(0.0..=1.0).contains(&c.tau) {
                return Err(invalid(KIND, format!("tau must be in [0, 1], got {}", c.tau)));
            }
            for side in Side::BOTH {
                self.entry(&c.patient_id, &c.motion_type, side)?;
            }
        }
        let mut ids = BTreeSet::new();
        for b in &s.brushes {
            if !ids.insert(b.id.as_str()) {
                return Err(invalid(KIND, format!("duplicate brush id '{}'", b.id)));
            }
            let entry = self.entry(&b.patient_id, &b.motion_type, b.side)?;
            let retained = s.truncation(&b.patient_id, &b.motion_type, b.side).unwrap_or(entry.bounds);
            check_interval(KIND, &format!("brush '{}'", b.id), &b.interval, &retained)?;
        }
        Ok(())
    }

    pub fn save_session(&self, s: &Session) -> Result<String, StoreError> {
        self.validate_session(s)?;
        self.put(SESSIONS, &s.id, s)?;
        Ok(s.id.clone())
    }

    pub fn load_session(&self, id: &str) -> Result<Session, StoreError> {
        self.get(SESSIONS, id)
    }

    /// Cells whose brush no longer exists in a saved session.
    pub fn dangling_cells<'a>(&self, doc: &'a PresentationDoc) -> Result<Vec<&'a Cell>, StoreError> {
        let mut out = Vec::new();
        for cell in &doc.cells {
            let found = match self.load_session(&cell.brush.session_id) {
                Ok(s) => s.brush(&cell.brush.brush_id).is_some(),
                Err(StoreError::NotFound { .. }) | Err(StoreError::InvalidId(_)) => false,
                Err(e) => return Err(e),
            };
            if !found {
                out.push(cell);
            }
        }
        Ok(out)
    }

    fn check_presentation(&self, doc: &PresentationDoc) -> Result<(), StoreError> {
        const KIND: &str = "presentation";
        check_id(&doc.id)?;
        let mut seen = BTreeSet::new();
        for cell in &doc.cells {
            if !doc.rows.contains(&cell.row) || !doc.columns.contains(&cell.column) {
                return Err(invalid(KIND, format!("cell {} is not on the grid", cell.label())));
            }
            if !seen.insert((&cell.row, &cell.column)) {
                return Err(invalid(KIND, format!("cell {} appears twice", cell.label())));
            }
            let total: f64 = cell.snapshot.shares.values().sum();
            if !cell.snapshot.shares.is_empty() && (total - 1.0).abs() > 1e-6 {
                return Err(invalid(KIND, format!("cell {} shares sum to {total}", cell.label())));
            }
        }
        let dangling = self.dangling_cells(doc)?;
        if !dangling.is_empty() {
            return Err(dangling_error(&dangling));
        }
        Ok(())
    }

    pub fn save_presentation(&self, doc: &PresentationDoc) -> Result<String, StoreError> {
        self.check_presentation(doc)?;
        self.put(PRESENTATIONS, &doc.id, doc)?;
        Ok(doc.id.clone())
    }

    pub fn load_presentation(&self, id: &str) -> Result<PresentationDoc, StoreError> {
        self.get(PRESENTATIONS, id)
    }

    /// Serializes a presentation. Fails, listing the cells, when any cell's brush has
    /// been deleted from its session.
    pub fn export_presentation(&self, doc: &PresentationDoc, format: ExportFormat) -> Result<Vec<u8>, StoreError> {
        let dangling = self.dangling_cells(doc)?;
        if !dangling.is_empty() {
            return Err(dangling_error(&dangling));
        }
        Ok(match format {
            ExportFormat::Document => serde_json::to_vec_pretty(doc).expect("presentation serializes"),
            ExportFormat::StaticRender => render::presentation_svg(doc).into_bytes(),
        })
    }

    /// Parses an exported document and saves it.
    pub fn import_presentation(&self, bytes: &[u8]) -> Result<PresentationDoc, StoreError> {
        let doc: PresentationDoc = serde_json::from_slice(bytes).map_err(|e| invalid("presentation", e.to_string()))?;
        self.save_presentation(&doc)?;
        Ok(doc)
    }
}

fn dangling_error(cells: &[&Cell]) -> StoreError {
    let list: Vec<String> = cells
        .iter()
        .map(|c| format!("cell {} references missing brush {}/{}", c.label(), c.brush.session_id, c.brush.brush_id))
        .collect();
    StoreError::DanglingBrush(list.join("; "))
}
