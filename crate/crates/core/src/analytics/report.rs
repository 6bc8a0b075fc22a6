//! Report bundle: plot-ready CSV tables plus a text summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{cdf, category_counts, correlation_from_counts, function_popularity, AnalyticsError, CountMode, CorrelationRow, PopularityRow};
use crate::profile::FgiProfile;
use crate::static_analysis::{set_algebra, StaticProfile};
use crate::types::Label;

pub const REPORT_FILES: &[&str] = &[
    "README.md",
    "summary.txt",
    "cdf_description_length.csv",
    "cdf_author_maintainer_count.csv",
    "cdf_dependency_count.csv",
    "cdf_static_function_count.csv",
    "cdf_dynamic_function_count.csv",
    "url_summary.csv",
    "metadata_summary.csv",
    "popularity_s_same.csv",
    "popularity_s_r_minus.csv",
    "popularity_s_m_minus.csv",
    "correlation.csv",
];

const LABELS: [Label; 2] = [Label::Legitimate, Label::Malicious];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptionAxis {
    #[default]
    Tokens,
    Characters,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub description_axis: DescriptionAxis,
    pub count_mode: CountMode,
}

const BUNDLE_README: &str = "# Analysis report

All tables are UTF-8 CSV with a header row. Labels are `legitimate` or
`malicious`; packages labeled `unknown` are left out.

| file | columns |
|------|---------|
| cdf_description_length.csv | label, value, cumulative |
| cdf_author_maintainer_count.csv | label, value, cumulative |
| cdf_dependency_count.csv | label, value, cumulative |
| cdf_static_function_count.csv | label, value, cumulative |
| cdf_dynamic_function_count.csv | label, value, cumulative |
| url_summary.csv | label, packages, with_url, with_git_url |
| metadata_summary.csv | label, metric, packages, mean, median, p80, max |
| popularity_s_same.csv | function_name, package_count, legitimate_packages, malicious_packages |
| popularity_s_r_minus.csv | same columns |
| popularity_s_m_minus.csv | same columns |
| correlation.csv | label, file_network, file_process, network_process |

CDF rows hold one point per distinct value: `cumulative` is the fraction of
packages with a value at or below `value`. Correlations are Pearson r over
per-package category counts; `n/a` marks a constant series or fewer than two
traced packages. Function counts are package counts: a package using a
function many times counts once.
";

fn num(v: f64) -> String {
    format!("{v}")
}

fn corr_cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "n/a".to_string())
}

struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    fn new(header: &[&str]) -> Result<Csv, AnalyticsError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Csv(w))
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) -> Result<(), AnalyticsError> {
        let cells: Vec<String> = cells.into_iter().collect();
        Ok(self.0.write_record(&cells)?)
    }

    fn bytes(self) -> Result<Vec<u8>, AnalyticsError> {
        self.0.into_inner().map_err(|e| AnalyticsError::Io(e.into_error()))
    }
}

type Series = BTreeMap<Label, Vec<f64>>;

fn cdf_table(series: &Series) -> Result<Vec<u8>, AnalyticsError> {
    let mut t = Csv::new(&["label", "value", "cumulative"])?;
    for (label, values) in series {
        if values.is_empty() {
            continue;
        }
        let c = cdf(values)?;
        for (v, f) in c.sorted_values.iter().zip(&c.cumulative) {
            t.row([label.to_string(), num(*v), num(*f)])?;
        }
    }
    t.bytes()
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Writes the bundle into `out_dir`, returning the files written.
pub fn write_report(profiles: &[FgiProfile], options: ReportOptions, out_dir: &Path) -> Result<Vec<PathBuf>, AnalyticsError> {
    let mut sorted: Vec<&FgiProfile> = profiles.iter().filter(|p| p.package.label != Label::Unknown).collect();
    if sorted.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    sorted.sort_by(|a, b| a.package.id().cmp(&b.package.id()).then_with(|| a.package.content_digest.cmp(&b.package.content_digest)));

    let mut description = Series::new();
    let mut people = Series::new();
    let mut deps = Series::new();
    let mut static_counts = Series::new();
    let mut dynamic_counts = Series::new();
    let mut urls: BTreeMap<Label, [usize; 3]> = BTreeMap::new();
    let mut static_by_label: BTreeMap<Label, Vec<StaticProfile>> = BTreeMap::new();
    let mut corr_rows: BTreeMap<Label, Vec<(Label, [f64; 3])>> = BTreeMap::new();
    for label in LABELS {
        for s in [&mut description, &mut people, &mut deps, &mut static_counts, &mut dynamic_counts] {
            s.insert(label, Vec::new());
        }
        urls.insert(label, [0; 3]);
        static_by_label.insert(label, Vec::new());
        corr_rows.insert(label, Vec::new());
    }
    for p in &sorted {
        let label = p.package.label;
        let f = p.features_or_empty();
        let d = match options.description_axis {
            DescriptionAxis::Tokens => f.description_tokens,
            DescriptionAxis::Characters => f.description_length,
        };
        description.get_mut(&label).unwrap().push(d as f64);
        people.get_mut(&label).unwrap().push(f.author_maintainer_count as f64);
        deps.get_mut(&label).unwrap().push(f.dependency_count as f64);
        static_counts.get_mut(&label).unwrap().push(p.static_profile.calls.len() as f64);
        let u = urls.get_mut(&label).unwrap();
        u[0] += 1;
        u[1] += usize::from(f.has_url);
        u[2] += usize::from(f.has_git_url);
        static_by_label.get_mut(&label).unwrap().push(p.static_profile.clone());
        if let Some(dp) = &p.dynamic_profile {
            let counts = category_counts(dp, options.count_mode);
            dynamic_counts.get_mut(&label).unwrap().push(counts.iter().sum());
            corr_rows.get_mut(&label).unwrap().push((label, counts));
        }
    }

    let mut files: Vec<(&str, Vec<u8>)> = vec![("README.md", BUNDLE_README.as_bytes().to_vec())];
    let mut summary = String::new();
    writeln!(summary, "packages: {} legitimate, {} malicious", urls[&Label::Legitimate][0], urls[&Label::Malicious][0]).unwrap();

    files.push(("cdf_description_length.csv", cdf_table(&description)?));
    files.push(("cdf_author_maintainer_count.csv", cdf_table(&people)?));
    files.push(("cdf_dependency_count.csv", cdf_table(&deps)?));
    files.push(("cdf_static_function_count.csv", cdf_table(&static_counts)?));
    files.push(("cdf_dynamic_function_count.csv", cdf_table(&dynamic_counts)?));

    let mut t = Csv::new(&["label", "packages", "with_url", "with_git_url"])?;
    for (label, [n, with_url, with_git]) in &urls {
        t.row([label.to_string(), n.to_string(), with_url.to_string(), with_git.to_string()])?;
    }
    files.push(("url_summary.csv", t.bytes()?));

    let mut t = Csv::new(&["label", "metric", "packages", "mean", "median", "p80", "max"])?;
    let metrics: [(&str, &Series); 5] = [
        ("description_length", &description),
        ("author_maintainer_count", &people),
        ("dependency_count", &deps),
        ("static_function_count", &static_counts),
        ("dynamic_function_count", &dynamic_counts),
    ];
    writeln!(summary, "\nmetric medians (legitimate / malicious):").unwrap();
    for (metric, series) in metrics {
        let mut medians = Vec::new();
        for (label, values) in series {
            if values.is_empty() {
                t.row([label.to_string(), metric.to_string(), "0".into(), "n/a".into(), "n/a".into(), "n/a".into(), "n/a".into()])?;
                medians.push("n/a".to_string());
                continue;
            }
            let mut v = values.clone();
            v.sort_by(f64::total_cmp);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let c = cdf(&v)?;
            t.row([
                label.to_string(),
                metric.to_string(),
                v.len().to_string(),
                num(mean),
                num(median(&v)),
                num(c.quantile(0.8)),
                num(*v.last().unwrap()),
            ])?;
            medians.push(num(median(&v)));
        }
        writeln!(summary, "  {metric}: {}", medians.join(" / ")).unwrap();
    }
    files.push(("metadata_summary.csv", t.bytes()?));

    let algebra = set_algebra(&static_by_label[&Label::Malicious], &static_by_label[&Label::Legitimate])
        .map_err(|_| AnalyticsError::EmptyInput)?;
    let pop = function_popularity(&algebra);
    writeln!(summary, "\nstatic function sets:").unwrap();
    for (name, rows) in [("s_same", &pop.s_same), ("s_r_minus", &pop.s_r_minus), ("s_m_minus", &pop.s_m_minus)] {
        let mut t = Csv::new(&["function_name", "package_count", "legitimate_packages", "malicious_packages"])?;
        for PopularityRow { function_name, package_count, legitimate_packages, malicious_packages } in rows {
            t.row([function_name.clone(), package_count.to_string(), legitimate_packages.to_string(), malicious_packages.to_string()])?;
        }
        let file = match name {
            "s_same" => "popularity_s_same.csv",
            "s_r_minus" => "popularity_s_r_minus.csv",
            _ => "popularity_s_m_minus.csv",
        };
        files.push((file, t.bytes()?));
        let top: Vec<&str> = rows.iter().take(5).map(|r| r.function_name.as_str()).collect();
        writeln!(summary, "  {name}: {} functions; top: {}", rows.len(), if top.is_empty() { "-".to_string() } else { top.join(", ") }).unwrap();
    }

    let mut t = Csv::new(&["label", "file_network", "file_process", "network_process"])?;
    writeln!(summary, "\ndynamic count correlations (file-network, file-process, network-process):").unwrap();
    for (label, rows) in &corr_rows {
        let row = match correlation_from_counts(rows) {
            Ok(m) => m.rows[label],
            Err(AnalyticsError::InsufficientData(_)) | Err(AnalyticsError::EmptyInput) => {
                CorrelationRow { file_network: None, file_process: None, network_process: None }
            }
            Err(e) => return Err(e),
        };
        let cells = [corr_cell(row.file_network), corr_cell(row.file_process), corr_cell(row.network_process)];
        writeln!(summary, "  {label}: {} ({} traced packages)", cells.join(", "), rows.len()).unwrap();
        t.row([label.to_string(), cells[0].clone(), cells[1].clone(), cells[2].clone()])?;
    }
    files.push(("correlation.csv", t.bytes()?));
    files.push(("summary.txt", summary.into_bytes()));

    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for name in REPORT_FILES {
        let (_, bytes) = files.iter().find(|(n, _)| n == name).expect("every declared file is produced");
        let path = out_dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
