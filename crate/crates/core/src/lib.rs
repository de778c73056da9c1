//! Cross-limb muscle activity comparison.
//!
//! This crate holds the numeric side of the workbench: the assessment data
//! model, windowed RMS envelopes, motion derivatives, brushed-interval
//! proportions, and the significance pipeline that scores how far one limb's
//! envelope distribution deviates from the other's.
//!
//! Everything here is a pure function over owned or borrowed values. The crate
//! is `no_std` and only needs an allocator; file formats, persistence and the
//! HTTP service live in the `limbscope` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assessment;
pub mod decimate;
mod error;
pub mod motion;
pub mod muscle;
pub mod proportion;
#[cfg(feature = "serde")]
mod serde_ext;
pub mod signal;
pub mod significance;

pub use assessment::{Assessment, Interval, MuscleRecording, Side, VideoRef};
pub use error::{Error, Result};
pub use motion::{derive_acceleration, derive_displacement, derive_speed, MotionTrack, Series};
pub use muscle::{default_catalog, MuscleGroup, MuscleId};
pub use proportion::{proportion_summary, ProportionSummary};
pub use signal::{resample_to_grid, rms_envelope, Envelope, RawEmgChannel};
pub use significance::{
    apply_threshold, compare_bundles, BundleComparison, CompareConfig, HighlightedEnvelope, MuscleSignificance,
    SharedBuckets, ValueHistogram, VisibilityReport,
};

/// Default RMS window length in seconds.
pub const DEFAULT_WINDOW_S: f64 = 0.100;
/// Default RMS hop in seconds.
pub const DEFAULT_HOP_S: f64 = 0.010;
/// Default cluster-count search range for the shared buckets.
pub const DEFAULT_K_RANGE: (usize, usize) = (2, 8);
