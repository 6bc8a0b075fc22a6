//! The three-level record kept for each package.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusError, ExtractionLimits, PackageRef};
use crate::dynamic_trace::{self, DynamicProfile};
use crate::metadata::{self, MetadataFeatures, PackageMetadata};
use crate::static_analysis::{self, FunctionCatalog, StaticProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgiProfile {
    pub package: PackageRef,
    /// Absent when no manifest could be parsed.
    pub metadata: Option<PackageMetadata>,
    pub metadata_features: Option<MetadataFeatures>,
    pub static_profile: StaticProfile,
    pub dynamic_profile: Option<DynamicProfile>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FgiProfile {
    /// Metadata features, or the all-empty features when the manifest was
    /// missing.
    pub fn features_or_empty(&self) -> MetadataFeatures {
        self.metadata_features.unwrap_or_else(|| metadata::metadata_features(&PackageMetadata::default()))
    }
}

/// Unpacks a stored package under `work_root` and extracts metadata and
/// static call-sites, plus dynamic events when a trace log is supplied.
pub fn extract_profile(
    package: &PackageRef,
    work_root: &Path,
    limits: ExtractionLimits,
    catalog: &FunctionCatalog,
    trace_log: Option<&Path>,
) -> Result<FgiProfile, CorpusError> {
    let bytes = std::fs::read(&package.archive_path)
        .map_err(|e| CorpusError::UnreadableArchive(format!("{}: {e}", package.archive_path.display())))?;
    let tree = corpus::unpack_bytes(&bytes, package.ecosystem, &work_root.join(&package.content_digest), limits)?;
    let mut warnings = tree.warnings.clone();
    let metadata = match metadata::parse_manifest(&tree, package.ecosystem) {
        Ok(md) => Some(md),
        Err(e) => {
            warnings.push(format!("metadata: {e}"));
            None
        }
    };
    let static_profile = static_analysis::static_profile(package.id(), &tree, catalog);
    warnings.extend(static_profile.warnings.iter().map(|w| format!("static: {w}")));
    let dynamic_profile = match trace_log {
        Some(log) => match dynamic_trace::dynamic_profile(package.id(), log, catalog) {
            Ok(p) => Some(p),
            Err(e) => {
                warnings.push(format!("dynamic: {e}"));
                None
            }
        },
        None => None,
    };
    Ok(FgiProfile {
        package: package.clone(),
        metadata_features: metadata.as_ref().map(metadata::metadata_features),
        metadata,
        static_profile,
        dynamic_profile,
        warnings,
    })
}
