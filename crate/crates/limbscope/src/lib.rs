//! Ingestion, storage, the comparison engine, the HTTP service and the command line
//! for cross-limb EMG comparison. The numeric core lives in `limbscope-core`.

pub mod api;
pub mod cli;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod formats;
pub mod ingest;
pub mod render;
pub mod session;
pub mod store;

pub use engine::{CompareInputs, CompareResult, ComparisonPayload};
pub use error::{IngestError, StoreError};
pub use store::DocumentStore;
