//! Cross-limb significance scoring.
//!
//! For each muscle, the envelope values of both limbs are pooled and clustered to get
//! one bucket layout. Each limb's histogram over those buckets is compared to the other
//! limb's with KL divergence, damped by the limb's positive skew, and normalized over
//! the whole comparison. The normalized score scales the envelope into the highlighted
//! series that the threshold slider filters.

mod bundle;
pub mod histogram;
pub mod kmeans;

pub use bundle::{
    apply_threshold, compare_bundles, significance_score, skew_weight, BundleComparison, CompareConfig,
    HighlightedEnvelope, MotionSummary, MuscleComparison, MuscleSignificance, MuscleVisibility, SideChart, SidePair,
    VisibilityReport,
};
pub use histogram::{histogram, kl_divergence, kl_divergence_probs, skewness, ValueHistogram};
pub use kmeans::{elbow, kmeans_1d, shared_buckets, wcss_profile, Clustering, SharedBuckets};
