//! One recorded motion trial of one limb.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::motion::MotionTrack;
use crate::muscle::MuscleId;
use crate::signal::{rms_envelope, Envelope, RawEmgChannel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    Affected,
    Unaffected,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Affected, Side::Unaffected];

    pub fn opposite(self) -> Side {
        match self {
            Side::Affected => Side::Unaffected,
            Side::Unaffected => Side::Affected,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Affected => "affected",
            Side::Unaffected => "unaffected",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        Self::BOTH.into_iter().find(|side| side.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub t0: f64,
    pub t1: f64,
}

impl Interval {
    pub fn new(t0: f64, t1: f64) -> Self {
        Self { t0, t1 }
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    /// `self ⊆ outer` with a nanosecond of slack for round-tripped timestamps.
    pub fn within(&self, outer: &Interval) -> bool {
        const SLACK: f64 = 1e-9;
        self.t0 < self.t1 && self.t0 >= outer.t0 - SLACK && self.t1 <= outer.t1 + SLACK
    }

    /// Validates `self` against `bounds`, reporting the valid bounds on failure.
    pub fn check_within(&self, bounds: &Interval) -> Result<()> {
        if self.t0.is_finite() && self.t1.is_finite() && self.within(bounds) {
            Ok(())
        } else {
            Err(Error::IntervalOutOfBounds { t0: self.t0, t1: self.t1, min: bounds.t0, max: bounds.t1 })
        }
    }
}

/// Video kept by reference; `offset_s` is the video time at recording time zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VideoRef {
    pub path: String,
    pub offset_s: f64,
}

/// Raw leads recorded from one muscle: one for a single-column layout, two for a
/// bipolar pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MuscleRecording {
    pub muscle: MuscleId,
    pub leads: Vec<RawEmgChannel>,
}

impl MuscleRecording {
    pub fn single(channel: RawEmgChannel) -> Self {
        Self { muscle: channel.muscle.clone(), leads: alloc::vec![channel] }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assessment {
    pub patient_id: String,
    pub motion_type: String,
    pub side: Side,
    /// Keyed by muscle name.
    pub muscles: BTreeMap<String, MuscleRecording>,
    pub motion: Option<MotionTrack>,
    pub video: Option<VideoRef>,
    /// Portion of the recording that feeds envelopes and summaries. Raw data outside
    /// it is kept so truncation can be widened again.
    pub retained: Interval,
}

impl Assessment {
    /// Validates the recordings and retains the full recording.
    pub fn new(
        patient_id: impl Into<String>,
        motion_type: impl Into<String>,
        side: Side,
        recordings: Vec<MuscleRecording>,
        motion: Option<MotionTrack>,
        video: Option<VideoRef>,
    ) -> Result<Self> {
        let mut muscles = BTreeMap::new();
        let mut reference: Option<(f64, usize, f64)> = None;
        for rec in recordings {
            if rec.leads.is_empty() {
                return Err(Error::EmptyInput("muscle without leads"));
            }
            for lead in &rec.leads {
                lead.check_regular()?;
                let first = *lead.times.first().ok_or(Error::EmptyInput("empty channel"))?;
                let base = (lead.sample_rate, lead.len(), first);
                match reference {
                    None => reference = Some(base),
                    Some((rate, len, t)) => {
                        if rate != base.0 || len != base.1 || (t - base.2).abs() > 1e-9 {
                            return Err(Error::InvalidParameter(alloc::format!(
                                "channel for {} does not share the assessment's sample rate and time base",
                                rec.muscle
                            )));
                        }
                    }
                }
            }
            let name = rec.muscle.name.clone();
            if muscles.insert(name.clone(), rec).is_some() {
                return Err(Error::InvalidParameter(alloc::format!("duplicate muscle '{name}'")));
            }
        }
        if muscles.is_empty() {
            return Err(Error::EmptyInput("assessment without channels"));
        }
        if let Some(track) = &motion {
            track.check_monotonic()?;
        }
        let mut assessment = Assessment {
            patient_id: patient_id.into(),
            motion_type: motion_type.into(),
            side,
            muscles,
            motion,
            video,
            retained: Interval::new(0.0, 0.0),
        };
        assessment.retained = assessment.bounds();
        Ok(assessment)
    }

    fn any_lead(&self) -> &RawEmgChannel {
        &self.muscles.values().next().expect("assessment has channels").leads[0]
    }

    /// First and last EMG timestamp.
    pub fn bounds(&self) -> Interval {
        let (t0, t1) = self.any_lead().bounds().unwrap_or((0.0, 0.0));
        Interval::new(t0, t1)
    }

    pub fn sample_rate(&self) -> f64 {
        self.any_lead().sample_rate
    }

    pub fn muscle_ids(&self) -> impl Iterator<Item = &MuscleId> {
        self.muscles.values().map(|r| &r.muscle)
    }

    /// Copy with `retained = [t0, t1]`. Always checked against the full recording, so a
    /// later call may widen an earlier truncation.
    pub fn truncate(&self, t0: f64, t1: f64) -> Result<Assessment> {
        let interval = Interval::new(t0, t1);
        interval.check_within(&self.bounds())?;
        Ok(Assessment { retained: interval, ..self.clone() })
    }

    /// Same recording attributed to the other limb.
    pub fn relabeled(&self, side: Side) -> Assessment {
        Assessment { side, ..self.clone() }
    }

    /// Envelope of one muscle over the retained interval; paired leads are averaged
    /// window by window.
    pub fn envelope(&self, muscle: &str, window_s: f64, hop_s: f64) -> Result<Envelope> {
        let rec = self.muscles.get(muscle).ok_or_else(|| Error::UnknownMuscle(muscle.into()))?;
        let per_lead = rec
            .leads
            .iter()
            .map(|lead| rms_envelope(&lead.slice(self.retained.t0, self.retained.t1), window_s, hop_s))
            .collect::<Result<Vec<_>>>()?;
        Envelope::mean_of(&per_lead)
    }

    pub fn envelopes(&self, window_s: f64, hop_s: f64) -> Result<BTreeMap<String, Envelope>> {
        self.muscles.keys().map(|name| Ok((name.clone(), self.envelope(name, window_s, hop_s)?))).collect()
    }

    /// Motion track restricted to the retained interval.
    pub fn retained_motion(&self) -> Option<MotionTrack> {
        self.motion.as_ref().map(|m| m.slice(self.retained.t0, self.retained.t1))
    }
}
