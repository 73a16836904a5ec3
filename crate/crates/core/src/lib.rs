//! Core library for replication-level image copy detection.
//!
//! The pipeline turns an integer replication level (0 = no replication,
//! N = total replication) into a discrete probability vector over the level
//! grid, trains a small multi-token patch encoder so that the per-token
//! cosine similarities between two images follow that vector, and scans
//! galleries of precomputed vector sets for replications.
//!
//! Modules:
//! - [`levelpdf`]: level-to-PDF conversion for the gaussian, linear, and
//!   exponential families, with numerically solved shape parameters.
//! - [`encoder`]: the patch transformer, its exact analytic gradients, and
//!   the training loop.
//! - [`objectives`]: the KL training objective and the competing baseline
//!   objectives.
//! - [`protocols`]: PCC / RD evaluation metrics and the replication-ratio
//!   statistic.
//! - [`gallery`]: the binary vector-set store and the brute-force matcher.
//! - [`synthgen`]: deterministic synthetic pair generation and annotation
//!   files.
//! - [`diagnostics`]: emitted data behind the diagnostic reports (token
//!   heatmap, per-pair distributions).

pub mod diagnostics;
pub mod encoder;
pub mod gallery;
pub mod levelpdf;
pub mod objectives;
pub mod protocols;
pub mod synthgen;
