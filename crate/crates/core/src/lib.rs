//! Fine-grained package information extraction and malicious package detection.
//!
//! Packages are described at three levels: manifest metadata, static call-sites
//! found in source files, and dynamic events recorded while installing them.
//! The crate turns archives into [`profile::FgiProfile`] records, computes
//! comparative statistics over labeled corpora, and trains classifiers on
//! embedding-based feature vectors.

pub mod analytics;
pub mod classifiers;
pub mod corpus;
pub mod dynamic_trace;
pub mod features;
pub mod metadata;
pub mod profile;
pub mod static_analysis;
pub mod types;

pub use profile::FgiProfile;
pub use types::{Category, Ecosystem, Label, Language};
