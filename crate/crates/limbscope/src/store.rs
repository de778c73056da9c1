//! Embedded JSON document store and the assessment catalog built on it.
//!
//! Layout: `<root>/<collection>/<id>.json`. Writes go to a temporary file in the same
//! directory followed by a rename, so readers see either the old or the new document.
//! Writers to the same id are serialized.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use limbscope_core::{Assessment, Interval, MuscleId, Side, VideoRef};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::StoreError;
use crate::ingest::{ingest, Ingested, ResolvedManifest};

pub const CATALOG: &str = "catalog";
pub const ASSESSMENTS: &str = "assessments";
pub const SESSIONS: &str = "sessions";
pub const PRESENTATIONS: &str = "presentations";
pub const COMPARISONS: &str = "comparisons";

pub const PAGE_SIZE: usize = 100;

pub fn check_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

/// Short hex digest used for derived ids.
pub fn digest_id(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())[..24].to_string()
}

type DocLock = Arc<Mutex<()>>;

#[derive(Debug)]
pub struct DocumentStore {
    root: PathBuf,
    locks: Mutex<HashMap<(String, String), DocLock>>,
    tmp_counter: AtomicU64,
}

impl DocumentStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for c in [CATALOG, ASSESSMENTS, SESSIONS, PRESENTATIONS, COMPARISONS] {
            let dir = root.join(c);
            fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        }
        Ok(DocumentStore { root, locks: Mutex::new(HashMap::new()), tmp_counter: AtomicU64::new(0) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, collection: &str, id: &str) -> PathBuf {
        self.root.join(collection).join(format!("{id}.json"))
    }

    fn lock_for(&self, collection: &str, id: &str) -> DocLock {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry((collection.to_string(), id.to_string())).or_default().clone()
    }

    pub fn put<T: Serialize>(&self, collection: &str, id: &str, doc: &T) -> Result<(), StoreError> {
        check_id(id)?;
        let bytes = serde_json::to_vec(doc)
            .map_err(|e| StoreError::Corrupt { path: self.path(collection, id).display().to_string(), source: e })?;
        let lock = self.lock_for(collection, id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let target = self.path(collection, id);
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = target.with_extension(format!("json.{}.{n}.tmp", std::process::id()));
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &target)
        };
        write().map_err(|e| {
            let _ = fs::remove_file(&tmp);
            StoreError::io(&target, e)
        })
    }

    pub fn get<T: DeserializeOwned>(&self, collection: &'static str, id: &str) -> Result<T, StoreError> {
        check_id(id)?;
        let path = self.path(collection, id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound { kind: kind_name(collection), id: id.to_string() })
            }
            Err(e) => return Err(StoreError::io(&path, e)),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt { path: path.display().to_string(), source: e })
    }

    pub fn exists(&self, collection: &str, id: &str) -> bool {
        check_id(id).is_ok() && self.path(collection, id).is_file()
    }

    pub fn delete(&self, collection: &'static str, id: &str) -> Result<(), StoreError> {
        check_id(id)?;
        let lock = self.lock_for(collection, id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.path(collection, id);
        match fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(StoreError::NotFound { kind: kind_name(collection), id: id.to_string() })
            }
            Err(e) => Err(StoreError::io(&path, e)),
        }
    }

    /// Ids in a collection, sorted.
    pub fn ids(&self, collection: &str) -> Result<Vec<String>, StoreError> {
        let dir = self.root.join(collection);
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| StoreError::io(&dir, e))? {
            let entry = entry.map_err(|e| StoreError::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".json") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn list<T: DeserializeOwned>(&self, collection: &'static str) -> Result<Vec<T>, StoreError> {
        self.ids(collection)?.iter().map(|id| self.get(collection, id)).collect()
    }
}

fn kind_name(collection: &str) -> &'static str {
    match collection {
        CATALOG | ASSESSMENTS => "assessment",
        SESSIONS => "session",
        PRESENTATIONS => "presentation",
        COMPARISONS => "comparison",
        _ => "document",
    }
}

/// Catalog metadata of one ingested assessment. The raw data lives in the
/// `assessments` collection under the same id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub patient_id: String,
    pub motion_type: String,
    pub side: Side,
    pub sample_rate_hz: f64,
    pub muscles: Vec<MuscleId>,
    pub channels: usize,
    pub bounds: Interval,
    pub has_motion: bool,
    pub video: Option<VideoRef>,
    pub manifest_path: Option<String>,
    pub fingerprint: String,
}

pub fn assessment_id(patient_id: &str, motion_type: &str, side: Side) -> String {
    digest_id(&[patient_id, motion_type, side.as_str()])
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssessmentQuery {
    pub patient: Option<String>,
    pub motion: Option<String>,
    pub side: Option<Side>,
    /// 1-based.
    pub page: Option<usize>,
}

/// Distinct values still selectable for each facet, given the other facets' filters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Facets {
    pub patient: Vec<String>,
    pub motion: Vec<String>,
    pub side: Vec<Side>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub items: Vec<CatalogEntry>,
    pub facets: Facets,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
}

/// Filters the catalog. Each facet lists the values that would still match with every
/// other active filter applied, so picking any of them yields at least one result.
pub fn query_entries(entries: &[CatalogEntry], q: &AssessmentQuery) -> QueryResult {
    let patient_ok = |e: &CatalogEntry| q.patient.as_deref().map_or(true, |p| e.patient_id == p);
    let motion_ok = |e: &CatalogEntry| q.motion.as_deref().map_or(true, |m| e.motion_type == m);
    let side_ok = |e: &CatalogEntry| q.side.map_or(true, |s| e.side == s);

    let mut patients = BTreeSet::new();
    let mut motions = BTreeSet::new();
    let mut sides = BTreeSet::new();
    for e in entries {
        let (p, m, s) = (patient_ok(e), motion_ok(e), side_ok(e));
        if m && s {
            patients.insert(e.patient_id.clone());
        }
        if p && s {
            motions.insert(e.motion_type.clone());
        }
        if p && m {
            sides.insert(e.side);
        }
    }
    let mut matches: Vec<CatalogEntry> =
        entries.iter().filter(|e| patient_ok(e) && motion_ok(e) && side_ok(e)).cloned().collect();
    matches.sort_by(|a, b| (&a.patient_id, &a.motion_type, a.side).cmp(&(&b.patient_id, &b.motion_type, b.side)));
    let total = matches.len();
    let page = q.page.unwrap_or(1).max(1);
    let items = matches.into_iter().skip((page - 1) * PAGE_SIZE).take(PAGE_SIZE).collect();
    QueryResult {
        items,
        facets: Facets {
            patient: patients.into_iter().collect(),
            motion: motions.into_iter().collect(),
            side: sides.into_iter().collect(),
        },
        total,
        page,
        page_size: PAGE_SIZE,
    }
}

impl DocumentStore {
    /// Adds an assessment to the catalog, replacing any earlier one for the same
    /// (patient, motion, side).
    pub fn put_assessment(&self, ingested: &Ingested) -> Result<CatalogEntry, StoreError> {
        let a = &ingested.assessment;
        let id = assessment_id(&a.patient_id, &a.motion_type, a.side);
        let entry = CatalogEntry {
            id: id.clone(),
            patient_id: a.patient_id.clone(),
            motion_type: a.motion_type.clone(),
            side: a.side,
            sample_rate_hz: a.sample_rate(),
            muscles: a.muscle_ids().cloned().collect(),
            channels: a.muscles.values().map(|r| r.leads.len()).sum(),
            bounds: a.bounds(),
            has_motion: a.motion.is_some(),
            video: a.video.clone(),
            manifest_path: ingested.manifest_path.as_ref().map(|p| p.display().to_string()),
            fingerprint: ingested.fingerprint.clone(),
        };
        self.put(ASSESSMENTS, &id, a)?;
        self.put(CATALOG, &id, &entry)?;
        Ok(entry)
    }

    pub fn ingest_manifest(&self, manifest_path: &Path) -> Result<CatalogEntry, StoreError> {
        let resolved = ResolvedManifest::load(manifest_path)?;
        let ingested = ingest(&resolved)?;
        self.put_assessment(&ingested)
    }

    pub fn catalog(&self) -> Result<Vec<CatalogEntry>, StoreError> {
        self.list(CATALOG)
    }

    pub fn query_assessments(&self, q: &AssessmentQuery) -> Result<QueryResult, StoreError> {
        Ok(query_entries(&self.catalog()?, q))
    }

    pub fn entry(&self, patient_id: &str, motion_type: &str, side: Side) -> Result<CatalogEntry, StoreError> {
        self.get(CATALOG, &assessment_id(patient_id, motion_type, side)).map_err(|e| match e {
            StoreError::NotFound { kind, .. } => {
                StoreError::NotFound { kind, id: format!("{patient_id}/{motion_type}/{side}") }
            }
            other => other,
        })
    }

    pub fn load_assessment(&self, entry: &CatalogEntry) -> Result<Assessment, StoreError> {
        self.get(ASSESSMENTS, &entry.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(p: &str, m: &str, s: Side) -> CatalogEntry {
        CatalogEntry {
            id: assessment_id(p, m, s),
            patient_id: p.into(),
            motion_type: m.into(),
            side: s,
            sample_rate_hz: 1000.0,
            muscles: Vec::new(),
            channels: 0,
            bounds: Interval::new(0.0, 1.0),
            has_motion: false,
            video: None,
            manifest_path: None,
            fingerprint: String::new(),
        }
    }

    #[test]
    fn facets_apply_the_other_filters() {
        let entries = vec![
            entry("P1", "flexion", Side::Affected),
            entry("P1", "flexion", Side::Unaffected),
            entry("P1", "abduction", Side::Affected),
            entry("P2", "rotation", Side::Affected),
        ];
        let r = query_entries(&entries, &AssessmentQuery { patient: Some("P1".into()), ..Default::default() });
        assert_eq!(r.total, 3);
        assert_eq!(r.facets.motion, vec!["abduction", "flexion"]);
        assert_eq!(r.facets.patient, vec!["P1", "P2"]);
        let r = query_entries(&entries, &AssessmentQuery::default());
        assert_eq!(r.total, 4);
        assert_eq!(r.facets.side, vec![Side::Affected, Side::Unaffected]);
    }

    #[test]
    fn ids_are_checked() {
        assert!(check_id("session-1.v2").is_ok());
        for bad in ["", "../x", "a/b", ".hidden", "sp ace"] {
            assert!(check_id(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn put_get_delete() {
        let dir = tempfile::tempdir().unwrap();
        let store = DocumentStore::open(dir.path()).unwrap();
        store.put(SESSIONS, "s1", &vec![1, 2, 3]).unwrap();
        assert_eq!(store.get::<Vec<i32>>(SESSIONS, "s1").unwrap(), vec![1, 2, 3]);
        assert_eq!(store.ids(SESSIONS).unwrap(), vec!["s1"]);
        store.delete(SESSIONS, "s1").unwrap();
        let err = store.get::<Vec<i32>>(SESSIONS, "s1").unwrap_err();
        assert_eq!(err.to_string(), "session 's1' not found");
    }
}
