use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::histogram::{histogram, kl_divergence, skewness, ValueHistogram};
use super::kmeans::{shared_buckets, SharedBuckets};
use crate::assessment::{Assessment, Interval, Side};
use crate::motion::{derive_displacement, derive_speed, Series};
use crate::muscle::MuscleId;
use crate::signal::Envelope;
use crate::{Error, Result, DEFAULT_HOP_S, DEFAULT_K_RANGE, DEFAULT_WINDOW_S};

/// One value per limb.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SidePair<T> {
    pub affected: T,
    pub unaffected: T,
}

impl<T> SidePair<T> {
    pub fn get(&self, side: Side) -> &T {
        match side {
            Side::Affected => &self.affected,
            Side::Unaffected => &self.unaffected,
        }
    }

    pub fn get_mut(&mut self, side: Side) -> &mut T {
        match side {
            Side::Affected => &mut self.affected,
            Side::Unaffected => &mut self.unaffected,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Side, &T)> {
        [(Side::Affected, &self.affected), (Side::Unaffected, &self.unaffected)].into_iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompareConfig {
    pub window_s: f64,
    pub hop_s: f64,
    pub k_min: usize,
    pub k_max: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { window_s: DEFAULT_WINDOW_S, hop_s: DEFAULT_HOP_S, k_min: DEFAULT_K_RANGE.0, k_max: DEFAULT_K_RANGE.1 }
    }
}

impl CompareConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("window_s must be > 0, got {}", self.window_s)));
        }
        if !(self.hop_s.is_finite() && self.hop_s > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("hop_s must be > 0, got {}", self.hop_s)));
        }
        if self.k_min < 2 || self.k_max < self.k_min {
            return Err(Error::InvalidParameter(alloc::format!(
                "k range must satisfy 2 <= k_min <= k_max, got ({}, {})",
                self.k_min,
                self.k_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MuscleSignificance {
    pub muscle: MuscleId,
    pub side: Side,
    /// KL divergence of this side's histogram from the opposite limb's.
    pub divergence: f64,
    pub skewness: f64,
    pub skew_weight: f64,
    /// `divergence * skew_weight`.
    pub score: f64,
    /// `score` over the largest score among non-muted charts in the comparison.
    pub normalized_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HighlightedEnvelope {
    pub muscle: MuscleId,
    pub side: Side,
    /// Original power, drawn as an unfilled stroke.
    pub base: Envelope,
    /// `base * normalized_score`, drawn filled.
    pub highlighted: Vec<f64>,
    pub visible_mask: Vec<bool>,
}

impl HighlightedEnvelope {
    pub fn is_visible(&self) -> bool {
        self.visible_mask.iter().any(|&v| v)
    }

    pub fn peak(&self) -> f64 {
        self.highlighted.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SideChart {
    pub significance: MuscleSignificance,
    pub histogram: ValueHistogram,
    pub chart: HighlightedEnvelope,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MuscleComparison {
    pub muscle: MuscleId,
    pub buckets: SharedBuckets,
    pub sides: SidePair<SideChart>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotionSummary {
    pub speed: Option<Series>,
    pub displacement: Option<Series>,
}

impl MotionSummary {
    fn of(assessment: &Assessment) -> Self {
        match assessment.retained_motion() {
            Some(track) => Self { speed: derive_speed(&track).ok(), displacement: derive_displacement(&track).ok() },
            None => Self::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BundleComparison {
    pub patient_id: String,
    pub motion_type: String,
    pub config: CompareConfig,
    pub retained: SidePair<Interval>,
    /// Muscles recorded on both limbs, ordered by name.
    pub muscles: Vec<MuscleComparison>,
    /// Muscles recorded on one limb only; excluded from scoring.
    pub unpaired: Vec<String>,
    pub muted: BTreeSet<String>,
    pub tau: f64,
    /// Largest highlighted sample over all non-muted charts.
    pub h_max: f64,
    pub motion: SidePair<MotionSummary>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MuscleVisibility {
    pub muscle: String,
    pub muted: bool,
    pub affected: bool,
    pub unaffected: bool,
    /// Both charts are empty (or the muscle is muted), so the row is removed.
    pub collapsed: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VisibilityReport {
    pub tau: f64,
    pub h_max: f64,
    pub muscles: Vec<MuscleVisibility>,
    /// Names of rows that are not collapsed.
    pub surviving: Vec<String>,
}

impl VisibilityReport {
    /// Visible `(muscle, side)` charts.
    pub fn visible_charts(&self) -> impl Iterator<Item = (&str, Side)> {
        self.muscles.iter().flat_map(|m| {
            let a = m.affected.then_some((m.muscle.as_str(), Side::Affected));
            let u = m.unaffected.then_some((m.muscle.as_str(), Side::Unaffected));
            a.into_iter().chain(u)
        })
    }
}

/// `1 / (1 + max(0, γ))`: a side whose mass sits at small values (positive skew) is
/// damped; symmetric or negatively skewed sides keep their full divergence.
pub fn skew_weight(gamma: f64) -> f64 {
    1.0 / (1.0 + gamma.max(0.0))
}

/// Directed score of one limb of one muscle against the opposite limb.
pub fn significance_score(
    muscle: &MuscleId,
    side: Side,
    side_values: &[f64],
    other_side_values: &[f64],
    buckets: &SharedBuckets,
) -> Result<(MuscleSignificance, ValueHistogram)> {
    let q = histogram(side_values, buckets)?;
    let p = histogram(other_side_values, buckets)?;
    let divergence = kl_divergence(&q, &p)?;
    let gamma = skewness(side_values);
    let weight = skew_weight(gamma);
    Ok((
        MuscleSignificance {
            muscle: muscle.clone(),
            side,
            divergence,
            skewness: gamma,
            skew_weight: weight,
            score: divergence * weight,
            normalized_score: 0.0,
        },
        q,
    ))
}

fn sample_visible(h: f64, tau: f64, h_max: f64) -> bool {
    h > 0.0 && h >= tau * h_max
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("tau must be in [0, 1], got {tau}")))
    }
}

/// Scores every muscle recorded on both limbs and builds the highlighted charts.
pub fn compare_bundles(
    affected: &Assessment,
    unaffected: &Assessment,
    config: &CompareConfig,
) -> Result<BundleComparison> {
    config.validate()?;
    if affected.patient_id != unaffected.patient_id || affected.motion_type != unaffected.motion_type {
        return Err(Error::MismatchedAssessments(alloc::format!(
            "({}, {}) vs ({}, {})",
            affected.patient_id,
            affected.motion_type,
            unaffected.patient_id,
            unaffected.motion_type
        )));
    }
    if affected.side != Side::Affected || unaffected.side != Side::Unaffected {
        return Err(Error::MismatchedAssessments(alloc::format!(
            "expected affected and unaffected sides, got {} and {}",
            affected.side,
            unaffected.side
        )));
    }

    let mut unpaired: Vec<String> = affected
        .muscles
        .keys()
        .filter(|m| !unaffected.muscles.contains_key(*m))
        .chain(unaffected.muscles.keys().filter(|m| !affected.muscles.contains_key(*m)))
        .cloned()
        .collect();
    unpaired.sort();

    let mut muscles = Vec::new();
    for (name, rec) in &affected.muscles {
        if !unaffected.muscles.contains_key(name) {
            continue;
        }
        let env_a = affected.envelope(name, config.window_s, config.hop_s)?;
        let env_u = unaffected.envelope(name, config.window_s, config.hop_s)?;
        let buckets = shared_buckets(&env_a.values, &env_u.values, (config.k_min, config.k_max))?;
        let (sig_a, hist_a) = significance_score(&rec.muscle, Side::Affected, &env_a.values, &env_u.values, &buckets)?;
        let (sig_u, hist_u) =
            significance_score(&rec.muscle, Side::Unaffected, &env_u.values, &env_a.values, &buckets)?;
        let chart = |side, base: Envelope| HighlightedEnvelope {
            muscle: rec.muscle.clone(),
            side,
            highlighted: alloc::vec![0.0; base.len()],
            visible_mask: alloc::vec![false; base.len()],
            base,
        };
        muscles.push(MuscleComparison {
            muscle: rec.muscle.clone(),
            buckets,
            sides: SidePair {
                affected: SideChart { significance: sig_a, histogram: hist_a, chart: chart(Side::Affected, env_a) },
                unaffected: SideChart { significance: sig_u, histogram: hist_u, chart: chart(Side::Unaffected, env_u) },
            },
        });
    }
    if muscles.is_empty() {
        return Err(Error::MismatchedAssessments("no muscle is recorded on both limbs".into()));
    }

    let mut comparison = BundleComparison {
        patient_id: affected.patient_id.clone(),
        motion_type: affected.motion_type.clone(),
        config: config.clone(),
        retained: SidePair { affected: affected.retained, unaffected: unaffected.retained },
        muscles,
        unpaired,
        muted: BTreeSet::new(),
        tau: 0.0,
        h_max: 0.0,
        motion: SidePair { affected: MotionSummary::of(affected), unaffected: MotionSummary::of(unaffected) },
    };
    comparison.renormalize();
    Ok(comparison)
}

/// Visibility of every chart at threshold `tau` against the comparison's current
/// scores. A sample is visible when its highlighted value is positive and at least
/// `tau * h_max`.
pub fn apply_threshold(comparison: &BundleComparison, tau: f64) -> Result<VisibilityReport> {
    check_tau(tau)?;
    let h_max = comparison.h_max;
    let muscles: Vec<MuscleVisibility> = comparison
        .muscles
        .iter()
        .map(|m| {
            let muted = comparison.muted.contains(&m.muscle.name);
            let visible = |side: Side| {
                !muted && m.sides.get(side).chart.highlighted.iter().any(|&h| sample_visible(h, tau, h_max))
            };
            let (affected, unaffected) = (visible(Side::Affected), visible(Side::Unaffected));
            MuscleVisibility {
                muscle: m.muscle.name.clone(),
                muted,
                affected,
                unaffected,
                collapsed: !(affected || unaffected),
            }
        })
        .collect();
    let surviving = muscles.iter().filter(|m| !m.collapsed).map(|m| m.muscle.clone()).collect();
    Ok(VisibilityReport { tau, h_max, muscles, surviving })
}

impl BundleComparison {
    pub fn muscle(&self, name: &str) -> Option<&MuscleComparison> {
        self.muscles.iter().find(|m| m.muscle.name == name)
    }

    pub fn significance(&self, name: &str, side: Side) -> Option<&MuscleSignificance> {
        self.muscle(name).map(|m| &m.sides.get(side).significance)
    }

    pub fn visibility(&self) -> VisibilityReport {
        apply_threshold(self, self.tau.clamp(0.0, 1.0)).expect("clamped tau is in range")
    }

    /// Copy with the per-sample masks recomputed at `tau`.
    pub fn with_threshold(&self, tau: f64) -> Result<BundleComparison> {
        check_tau(tau)?;
        let mut next = self.clone();
        next.tau = tau;
        next.refresh_masks();
        Ok(next)
    }

    /// Copy with `muscle` removed from normalization and visibility. Remaining scores
    /// are renormalized, so other charts may rescale.
    pub fn mute_muscle(&self, muscle: &str) -> Result<BundleComparison> {
        if self.muscle(muscle).is_none() {
            return Err(Error::UnknownMuscle(muscle.into()));
        }
        let active = self.muscles.iter().filter(|m| !self.muted.contains(&m.muscle.name)).count();
        if !self.muted.contains(muscle) && active <= 1 {
            return Err(Error::CannotMuteAll);
        }
        let mut next = self.clone();
        next.muted.insert(muscle.into());
        next.renormalize();
        Ok(next)
    }

    pub fn unmute_muscle(&self, muscle: &str) -> Result<BundleComparison> {
        if self.muscle(muscle).is_none() {
            return Err(Error::UnknownMuscle(muscle.into()));
        }
        let mut next = self.clone();
        next.muted.remove(muscle);
        next.renormalize();
        Ok(next)
    }

    /// Copy with the given muted set applied.
    pub fn with_muted(&self, muted: &BTreeSet<String>) -> Result<BundleComparison> {
        if let Some(unknown) = muted.iter().find(|m| self.muscle(m).is_none()) {
            return Err(Error::UnknownMuscle(unknown.clone()));
        }
        if self.muscles.iter().all(|m| muted.contains(&m.muscle.name)) {
            return Err(Error::CannotMuteAll);
        }
        let mut next = self.clone();
        next.muted = muted.clone();
        next.renormalize();
        Ok(next)
    }

    /// Recomputes normalized scores, highlighted series, `h_max` and masks from the raw
    /// scores and the current muted set.
    fn renormalize(&mut self) {
        let max_score = self
            .muscles
            .iter()
            .filter(|m| !self.muted.contains(&m.muscle.name))
            .flat_map(|m| [m.sides.affected.significance.score, m.sides.unaffected.significance.score])
            .fold(0.0, f64::max);
        let mut h_max: f64 = 0.0;
        for m in &mut self.muscles {
            let muted = self.muted.contains(&m.muscle.name);
            for side in Side::BOTH {
                let sc = m.sides.get_mut(side);
                let normalized = if muted || max_score <= 0.0 { 0.0 } else { sc.significance.score / max_score };
                sc.significance.normalized_score = normalized;
                sc.chart.highlighted = sc.chart.base.values.iter().map(|v| v * normalized).collect();
                if !muted {
                    h_max = h_max.max(sc.chart.peak());
                }
            }
        }
        self.h_max = h_max;
        self.refresh_masks();
    }

    fn refresh_masks(&mut self) {
        let (tau, h_max) = (self.tau, self.h_max);
        for m in &mut self.muscles {
            let muted = self.muted.contains(&m.muscle.name);
            for side in Side::BOTH {
                let chart = &mut m.sides.get_mut(side).chart;
                chart.visible_mask =
                    chart.highlighted.iter().map(|&h| !muted && sample_visible(h, tau, h_max)).collect();
            }
        }
    }
}
