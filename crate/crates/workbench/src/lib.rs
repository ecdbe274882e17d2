//! File formats, configuration layering and service clients around
//! `mupo-core`.
//!
//! The `mupo` binary is a thin shell over this crate.

pub mod embed;
pub mod error;
pub mod ingest;
pub mod landscape;
pub mod mock;
pub mod output;
pub mod settings;

pub use embed::{fetch_embeddings, EmbedClient, ENDPOINT_ENV};
pub use error::{Error, Result};
pub use ingest::{
    ingest_rollouts, IngestOptions, IngestedExample, IngestedRollout, RolloutFileRecord,
};
pub use landscape::{load_landscape, LoadedLandscape, CANNED_LANDSCAPES};
pub use mock::{mock_embedding, MockBehavior, MockEmbedServer};
pub use settings::{ConfigOverrides, Resolved, Source};
