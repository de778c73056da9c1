use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The RMS window holds more samples than the recording.
    WindowExceedsRecording {
        window_samples: usize,
        available: usize,
    },
    /// Timestamps are not strictly increasing or not uniform at the declared rate.
    IrregularSampling {
        index: usize,
    },
    /// A parameter is outside its domain (non-positive window, tau outside [0, 1], ...).
    InvalidParameter(String),
    /// A motion track has too few samples for the requested derivative.
    TrackTooShort {
        needed: usize,
        got: usize,
    },
    /// Requested interval is inverted or leaves the recording bounds.
    IntervalOutOfBounds {
        t0: f64,
        t1: f64,
        min: f64,
        max: f64,
    },
    /// All non-muted envelopes integrate to zero over the interval.
    NoActivityInInterval,
    /// Two histograms do not share bucket structure.
    HistogramsNotComparable,
    /// Muting would leave no muscle in the comparison.
    CannotMuteAll,
    UnknownMuscle(String),
    /// The two assessments cannot be compared (different patient, motion, or same side).
    MismatchedAssessments(String),
    EmptyInput(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::WindowExceedsRecording { window_samples, available } => {
                write!(f, "window exceeds recording: window needs {window_samples} samples, recording has {available}")
            }
            Error::IrregularSampling { index } => write!(f, "irregular sampling at sample {index}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::TrackTooShort { needed, got } => {
                write!(f, "track too short: need at least {needed} samples, got {got}")
            }
            Error::IntervalOutOfBounds { t0, t1, min, max } => {
                write!(f, "interval [{t0}, {t1}] is invalid; valid bounds are [{min}, {max}] with t0 < t1")
            }
            Error::NoActivityInInterval => f.write_str("no activity in interval"),
            Error::HistogramsNotComparable => f.write_str("histograms not comparable"),
            Error::CannotMuteAll => f.write_str("cannot mute all muscles"),
            Error::UnknownMuscle(name) => write!(f, "unknown muscle '{name}'"),
            Error::MismatchedAssessments(msg) => write!(f, "assessments not comparable: {msg}"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
        }
    }
}

impl core::error::Error for Error {}
