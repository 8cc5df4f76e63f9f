//! Finite computations around coarse dimension: Borst ordinals of finite set
//! systems, windows of the spaces `X_k^{(i)}`, `X_{ω,k}`, `Y_{ω,k}` and
//! `X_{2ω}`, their metrics, exact cover search, and constructive witnesses.

pub mod borst;
pub mod covers;
pub mod error;
pub mod metrics;
pub mod ordinal;
pub mod search;
pub mod spaces;
pub mod witness;

pub use borst::{ord_system, FinSet, Label, SetSystem};
pub use covers::{check_cover, Cover, Family};
pub use error::{Error, Result};
pub use metrics::{DistanceTable, MetricHandle, PointMetric, WindowMetric};
pub use ordinal::Ordinal;
pub use search::{build_afragment, decide_cover, AFragment, Decision, Outcome, SearchOptions};
pub use spaces::{gen_window, Point, Window, WindowSpec};

/// Version of the JSON layouts written by this crate.
pub const SCHEMA_VERSION: &str = "1";

/// Hex SHA-256 of `bytes`; used for window and input digests.
pub fn content_digest(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
