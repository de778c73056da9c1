//! The comparison pipeline shared by the CLI and the HTTP service.

use std::collections::{BTreeMap, BTreeSet};

use limbscope_core::decimate::{gather, peak_preserving_indices};
use limbscope_core::significance::{CompareConfig, MuscleSignificance, SidePair, VisibilityReport};
use limbscope_core::{
    apply_threshold, compare_bundles, proportion_summary, Assessment, BundleComparison, Envelope, Interval,
    MuscleGroup, ProportionSummary, Series, Side, VideoRef,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::StoreError;
use crate::render::color_of;
use crate::store::{digest_id, CatalogEntry, DocumentStore};

/// Largest number of points per series shipped to clients.
pub const MAX_SERIES_POINTS: usize = 2000;

pub const DEFAULT_SWEEP_STEPS: usize = 101;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no {side} assessment for patient '{patient_id}' and motion '{motion_type}'")]
    MissingSide { patient_id: String, motion_type: String, side: Side },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0}")]
    Core(#[from] limbscope_core::Error),
}

/// Everything that determines a comparison before muting and thresholding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareInputs {
    pub patient_id: String,
    pub motion_type: String,
    pub config: CompareConfig,
    #[serde(default)]
    pub truncations: SidePair<Option<Interval>>,
}

impl CompareInputs {
    pub fn new(patient_id: impl Into<String>, motion_type: impl Into<String>, config: CompareConfig) -> Self {
        CompareInputs {
            patient_id: patient_id.into(),
            motion_type: motion_type.into(),
            config,
            truncations: SidePair::default(),
        }
    }

    /// Cache key: the inputs plus the content fingerprints of both assessments.
    pub fn cache_key(&self, entries: &SidePair<CatalogEntry>) -> String {
        let inputs = serde_json::to_string(self).expect("inputs serialize");
        digest_id(&[&inputs, &entries.affected.fingerprint, &entries.unaffected.fingerprint])
    }
}

/// Both catalog entries of a (patient, motion) pair.
pub fn pair_entries(
    store: &DocumentStore,
    patient_id: &str,
    motion_type: &str,
) -> Result<SidePair<CatalogEntry>, EngineError> {
    let get = |side| match store.entry(patient_id, motion_type, side) {
        Err(StoreError::NotFound { .. }) => {
            Err(EngineError::MissingSide { patient_id: patient_id.into(), motion_type: motion_type.into(), side })
        }
        other => other.map_err(EngineError::from),
    };
    Ok(SidePair { affected: get(Side::Affected)?, unaffected: get(Side::Unaffected)? })
}

/// A scored comparison with nothing muted and tau = 0, plus the video references.
#[derive(Debug, Clone, PartialEq)]
pub struct Computed {
    pub comparison: BundleComparison,
    pub video: SidePair<Option<VideoRef>>,
}

pub fn compute_assessments(
    affected: &Assessment,
    unaffected: &Assessment,
    inputs: &CompareInputs,
) -> Result<Computed, EngineError> {
    let truncated = |a: &Assessment, t: &Option<Interval>| match t {
        Some(i) => a.truncate(i.t0, i.t1),
        None => Ok(a.clone()),
    };
    let a = truncated(affected, &inputs.truncations.affected)?;
    let u = truncated(unaffected, &inputs.truncations.unaffected)?;
    let comparison = compare_bundles(&a, &u, &inputs.config)?;
    Ok(Computed { comparison, video: SidePair { affected: a.video.clone(), unaffected: u.video.clone() } })
}

pub fn compute(store: &DocumentStore, inputs: &CompareInputs) -> Result<Computed, EngineError> {
    let entries = pair_entries(store, &inputs.patient_id, &inputs.motion_type)?;
    let a = store.load_assessment(&entries.affected)?;
    let u = store.load_assessment(&entries.unaffected)?;
    compute_assessments(&a, &u, inputs)
}

/// Applies muting and threshold to a computed comparison.
pub fn refine(computed: &Computed, muted: &BTreeSet<String>, tau: f64) -> Result<BundleComparison, EngineError> {
    Ok(computed.comparison.with_muted(muted)?.with_threshold(tau)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub visible_charts: usize,
    pub surviving: Vec<String>,
}

/// Visibility at `steps` evenly spaced thresholds from 0 to 1.
pub fn sweep(comparison: &BundleComparison, steps: usize) -> Result<Vec<SweepRow>, EngineError> {
    let steps = steps.max(2);
    (0..steps)
        .map(|i| {
            let tau = i as f64 / (steps - 1) as f64;
            let report = apply_threshold(comparison, tau)?;
            Ok(SweepRow { tau, visible_charts: report.visible_charts().count(), surviving: report.surviving })
        })
        .collect()
}

pub fn side_envelopes(comparison: &BundleComparison, side: Side) -> BTreeMap<String, Envelope> {
    comparison.muscles.iter().map(|m| (m.muscle.name.clone(), m.sides.get(side).chart.base.clone())).collect()
}

/// Proportions over `interval`, or `None` when no non-muted muscle is active there.
pub fn proportions(
    comparison: &BundleComparison,
    side: Side,
    interval: Interval,
) -> Result<Option<ProportionSummary>, EngineError> {
    match proportion_summary(&side_envelopes(comparison, side), interval, &comparison.muted, side) {
        Ok(s) => Ok(Some(s)),
        Err(limbscope_core::Error::NoActivityInInterval) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// The structured result file written by `limbscope compare` and returned by the
/// service as `result`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResult {
    pub patient_id: String,
    pub motion_type: String,
    pub config: CompareConfig,
    pub tau: f64,
    pub h_max: f64,
    pub muted: BTreeSet<String>,
    pub unpaired: Vec<String>,
    pub retained: SidePair<Interval>,
    /// Affected then unaffected for each muscle, muscles in name order.
    pub scores: Vec<MuscleSignificance>,
    pub visibility: VisibilityReport,
    pub surviving: Vec<String>,
    /// Over each side's full retained interval.
    pub proportions: SidePair<Option<ProportionSummary>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
}

pub fn compare_result(comparison: &BundleComparison, sweep_steps: Option<usize>) -> Result<CompareResult, EngineError> {
    let visibility = comparison.visibility();
    let scores = comparison
        .muscles
        .iter()
        .flat_map(|m| [m.sides.affected.significance.clone(), m.sides.unaffected.significance.clone()])
        .collect();
    Ok(CompareResult {
        patient_id: comparison.patient_id.clone(),
        motion_type: comparison.motion_type.clone(),
        config: comparison.config.clone(),
        tau: comparison.tau,
        h_max: comparison.h_max,
        muted: comparison.muted.clone(),
        unpaired: comparison.unpaired.clone(),
        retained: comparison.retained.clone(),
        scores,
        surviving: visibility.surviving.clone(),
        visibility,
        proportions: SidePair {
            affected: proportions(comparison, Side::Affected, comparison.retained.affected)?,
            unaffected: proportions(comparison, Side::Unaffected, comparison.retained.unaffected)?,
        },
        sweep: sweep_steps.map(|n| sweep(comparison, n)).transpose()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPayload {
    pub significance: MuscleSignificance,
    pub visible: bool,
    pub times: Vec<f64>,
    pub base: Vec<f64>,
    pub highlighted: Vec<f64>,
    pub visible_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MusclePayload {
    pub muscle: String,
    pub group: MuscleGroup,
    pub color: String,
    pub muted: bool,
    pub collapsed: bool,
    pub affected: ChartPayload,
    pub unaffected: ChartPayload,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MotionPayload {
    pub speed: Option<Series>,
    pub displacement: Option<Series>,
}

/// Chart-ready comparison with every series decimated to at most
/// [`MAX_SERIES_POINTS`] points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPayload {
    pub patient_id: String,
    pub motion_type: String,
    pub tau: f64,
    pub h_max: f64,
    pub muted: BTreeSet<String>,
    pub unpaired: Vec<String>,
    pub retained: SidePair<Interval>,
    pub muscles: Vec<MusclePayload>,
    pub motion: SidePair<MotionPayload>,
    pub video: SidePair<Option<VideoRef>>,
}

fn decimate_series(s: &Series, max_points: usize) -> Series {
    let idx = peak_preserving_indices(&s.values, max_points);
    Series { times: gather(&s.times, &idx), values: gather(&s.values, &idx) }
}

pub fn payload(
    computed_video: &SidePair<Option<VideoRef>>,
    comparison: &BundleComparison,
    max_points: usize,
) -> ComparisonPayload {
    let visibility = comparison.visibility();
    let muscles = comparison
        .muscles
        .iter()
        .zip(&visibility.muscles)
        .map(|(m, vis)| {
            let chart = |side: Side| {
                let sc = m.sides.get(side);
                let c = &sc.chart;
                let idx = peak_preserving_indices(&c.base.values, max_points);
                ChartPayload {
                    significance: sc.significance.clone(),
                    visible: c.is_visible(),
                    times: gather(&c.base.times, &idx),
                    base: gather(&c.base.values, &idx),
                    highlighted: gather(&c.highlighted, &idx),
                    visible_mask: gather(&c.visible_mask, &idx),
                }
            };
            MusclePayload {
                muscle: m.muscle.name.clone(),
                group: m.muscle.group,
                color: color_of(&m.muscle).to_string(),
                muted: vis.muted,
                collapsed: vis.collapsed,
                affected: chart(Side::Affected),
                unaffected: chart(Side::Unaffected),
            }
        })
        .collect();
    let motion = |side: Side| {
        let s = comparison.motion.get(side);
        MotionPayload {
            speed: s.speed.as_ref().map(|x| decimate_series(x, max_points)),
            displacement: s.displacement.as_ref().map(|x| decimate_series(x, max_points)),
        }
    };
    ComparisonPayload {
        patient_id: comparison.patient_id.clone(),
        motion_type: comparison.motion_type.clone(),
        tau: comparison.tau,
        h_max: comparison.h_max,
        muted: comparison.muted.clone(),
        unpaired: comparison.unpaired.clone(),
        retained: comparison.retained.clone(),
        muscles,
        motion: SidePair { affected: motion(Side::Affected), unaffected: motion(Side::Unaffected) },
        video: computed_video.clone(),
    }
}

/// Where a brushed interval sits in the side's video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoLocator {
    pub path: String,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrushResult {
    pub side: Side,
    pub interval: Interval,
    /// `None` when nothing non-muted is active in the interval.
    pub summary: Option<ProportionSummary>,
    pub video: Option<VideoLocator>,
}

/// Proportions of a brushed interval plus the matching video segment
/// (`start = t0 + offset_s`).
pub fn brush(
    comparison: &BundleComparison,
    video: &SidePair<Option<VideoRef>>,
    side: Side,
    interval: Interval,
) -> Result<BrushResult, EngineError> {
    interval.check_within(comparison.retained.get(side))?;
    let summary = proportions(comparison, side, interval)?;
    let video = video.get(side).as_ref().map(|v| VideoLocator {
        path: v.path.clone(),
        start_s: interval.t0 + v.offset_s,
        end_s: interval.t1 + v.offset_s,
    });
    Ok(BrushResult { side, interval, summary, video })
}
