//! Comparative statistics between legitimate and malicious packages.

pub mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamic_trace::DynamicProfile;
use crate::static_analysis::SetAlgebraResult;
use crate::types::{Category, Label};

pub use report::{write_report, ReportOptions, REPORT_FILES};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("empty input")]
    EmptyInput,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("a series has zero variance")]
    ZeroVariance,
    #[error("need at least two series points, got {0}")]
    TooShort(usize),
    #[error("fewer than two {0} profiles")]
    InsufficientData(Label),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Empirical CDF with one point per distinct value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cdf {
    pub sorted_values: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl Cdf {
    /// F(x): fraction of samples at or below `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.sorted_values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// Smallest value whose cumulative fraction reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let idx = self.cumulative.partition_point(|&c| c < p - 1e-12);
        self.sorted_values[idx.min(self.sorted_values.len() - 1)]
    }
}

pub fn cdf(values: &[f64]) -> Result<Cdf, AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out = Cdf { sorted_values: Vec::new(), cumulative: Vec::new() };
    for (i, &v) in sorted.iter().enumerate() {
        let last_of_run = sorted.get(i + 1).is_none_or(|&next| next != v);
        if last_of_run {
            out.sorted_values.push(v);
            out.cumulative.push((i + 1) as f64 / n);
        }
    }
    Ok(out)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(AnalyticsError::TooShort(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson r, or `None` ("n/a") when either series is constant.
pub fn pearson_or_na(x: &[f64], y: &[f64]) -> Result<Option<f64>, AnalyticsError> {
    match pearson(x, y) {
        Ok(r) => Ok(Some(r)),
        Err(AnalyticsError::ZeroVariance) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Which per-package number stands for "dynamic function count".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// Every counted event.
    #[default]
    Raw,
    /// Distinct names per category.
    Distinct,
}

pub fn category_counts(profile: &DynamicProfile, mode: CountMode) -> [f64; 3] {
    let get = |c: Category| match mode {
        CountMode::Raw => profile.count(c) as f64,
        CountMode::Distinct => {
            let mut names: Vec<&str> =
                profile.events.iter().filter(|e| e.category == c).map(|e| e.function_name.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            names.len() as f64
        }
    };
    [get(Category::File), get(Category::Network), get(Category::Process)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub file_network: Option<f64>,
    pub file_process: Option<f64>,
    pub network_process: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub rows: BTreeMap<Label, CorrelationRow>,
}

/// Correlation of per-category counts across packages, per label. Rows are
/// (label, [file, network, process]).
pub fn correlation_from_counts(rows: &[(Label, [f64; 3])]) -> Result<CorrelationMatrix, AnalyticsError> {
    let mut by_label: BTreeMap<Label, Vec<[f64; 3]>> = BTreeMap::new();
    for (label, counts) in rows {
        by_label.entry(*label).or_default().push(*counts);
    }
    if by_label.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut out = BTreeMap::new();
    for (label, series) in by_label {
        if series.len() < 2 {
            return Err(AnalyticsError::InsufficientData(label));
        }
        let col = |i: usize| series.iter().map(|r| r[i]).collect::<Vec<f64>>();
        let (file, network, process) = (col(0), col(1), col(2));
        out.insert(
            label,
            CorrelationRow {
                file_network: pearson_or_na(&file, &network)?,
                file_process: pearson_or_na(&file, &process)?,
                network_process: pearson_or_na(&network, &process)?,
            },
        );
    }
    Ok(CorrelationMatrix { rows: out })
}

pub fn correlation_matrix(profiles: &[(Label, &DynamicProfile)], mode: CountMode) -> Result<CorrelationMatrix, AnalyticsError> {
    let rows: Vec<(Label, [f64; 3])> = profiles.iter().map(|(l, p)| (*l, category_counts(p, mode))).collect();
    correlation_from_counts(&rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularityRow {
    pub function_name: String,
    /// Packages of either label using the function.
    pub package_count: usize,
    pub legitimate_packages: usize,
    pub malicious_packages: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Popularity {
    pub s_same: Vec<PopularityRow>,
    pub s_r_minus: Vec<PopularityRow>,
    pub s_m_minus: Vec<PopularityRow>,
}

/// Ranks each function set by package count, ties alphabetical.
pub fn function_popularity(result: &SetAlgebraResult) -> Popularity {
    let rank = |names: &std::collections::BTreeSet<String>| {
        let mut rows: Vec<PopularityRow> = names
            .iter()
            .map(|n| {
                let legitimate_packages = result.package_count(n, Label::Legitimate);
                let malicious_packages = result.package_count(n, Label::Malicious);
                PopularityRow {
                    function_name: n.clone(),
                    package_count: legitimate_packages + malicious_packages,
                    legitimate_packages,
                    malicious_packages,
                }
            })
            .collect();
        rows.sort_by(|a, b| b.package_count.cmp(&a.package_count).then_with(|| a.function_name.cmp(&b.function_name)));
        rows
    };
    Popularity { s_same: rank(&result.s_same), s_r_minus: rank(&result.s_r_minus), s_m_minus: rank(&result.s_m_minus) }
}
