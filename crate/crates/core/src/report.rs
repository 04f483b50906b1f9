//! Aggregation of findings by file size, normalized summaries, and the
//! text / CSV / JSON serializers.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{Normalization, ScanConfig};
use crate::detectors::{SmellFinding, SmellKind};
use crate::error::ReportError;
use crate::ingest::SourceFile;

pub const BUCKET_WIDTH: usize = 100;
/// Ten 100-line buckets plus one open-ended bucket for 1000+.
pub const BUCKET_COUNT: usize = 11;
pub const REPORT_VERSION: &str = "1";

pub type KindCounts = BTreeMap<SmellKind, usize>;

fn zero_counts() -> KindCounts {
    SmellKind::ALL.iter().map(|&k| (k, 0)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    /// Inclusive lower bound on effective loc.
    pub lower: usize,
    /// Exclusive upper bound; `None` for the last bucket.
    pub upper: Option<usize>,
    pub files: usize,
    pub loc: usize,
    pub counts: KindCounts,
}

impl Bucket {
    pub fn label(&self) -> String {
        match self.upper {
            Some(upper) => format!("{}-{}", self.lower, upper - 1),
            None => format!("{}+", self.lower),
        }
    }
}

pub fn bucket_index(effective_loc: usize) -> usize {
    (effective_loc / BUCKET_WIDTH).min(BUCKET_COUNT - 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketReport {
    pub buckets: Vec<Bucket>,
    pub row_totals: KindCounts,
    pub grand_total: usize,
    pub files_total: usize,
    pub loc_total: usize,
}

impl BucketReport {
    pub fn empty() -> Self {
        let buckets = (0..BUCKET_COUNT)
            .map(|i| Bucket {
                lower: i * BUCKET_WIDTH,
                upper: (i + 1 < BUCKET_COUNT).then_some((i + 1) * BUCKET_WIDTH),
                files: 0,
                loc: 0,
                counts: zero_counts(),
            })
            .collect();
        Self {
            buckets,
            row_totals: zero_counts(),
            grand_total: 0,
            files_total: 0,
            loc_total: 0,
        }
    }

    /// Recomputes every total from the per-bucket cells.
    pub fn recompute_totals(&mut self) {
        self.row_totals = zero_counts();
        for bucket in &self.buckets {
            for (kind, n) in &bucket.counts {
                *self.row_totals.entry(*kind).or_default() += n;
            }
        }
        self.grand_total = self.row_totals.values().sum();
        self.files_total = self.buckets.iter().map(|b| b.files).sum();
        self.loc_total = self.buckets.iter().map(|b| b.loc).sum();
    }

    /// Checks that row, column and grand totals agree with the cells.
    pub fn check_consistency(&self) -> Result<(), String> {
        if self.buckets.len() != BUCKET_COUNT {
            return Err(format!(
                "expected {BUCKET_COUNT} buckets, found {}",
                self.buckets.len()
            ));
        }
        for kind in SmellKind::ALL {
            let column: usize = self
                .buckets
                .iter()
                .map(|b| b.counts.get(&kind).copied().unwrap_or(0))
                .sum();
            let total = self.row_totals.get(&kind).copied().unwrap_or(0);
            if column != total {
                return Err(format!(
                    "{kind}: buckets sum to {column}, total says {total}"
                ));
            }
        }
        let grand: usize = self.row_totals.values().sum();
        if grand != self.grand_total {
            return Err(format!(
                "row totals sum to {grand}, grand total says {}",
                self.grand_total
            ));
        }
        let files: usize = self.buckets.iter().map(|b| b.files).sum();
        if files != self.files_total {
            return Err(format!(
                "bucket files sum to {files}, total says {}",
                self.files_total
            ));
        }
        let loc: usize = self.buckets.iter().map(|b| b.loc).sum();
        if loc != self.loc_total {
            return Err(format!(
                "bucket loc sums to {loc}, total says {}",
                self.loc_total
            ));
        }
        Ok(())
    }
}

/// Places each file in its size bucket and counts its findings there.
pub fn bucket_findings(
    findings: &[SmellFinding],
    files: &[SourceFile],
) -> Result<BucketReport, ReportError> {
    let mut report = BucketReport::empty();
    let mut index_of: HashMap<&str, usize> = HashMap::with_capacity(files.len());
    for file in files {
        let idx = bucket_index(file.effective_loc);
        index_of.insert(&file.path, idx);
        report.buckets[idx].files += 1;
        report.buckets[idx].loc += file.effective_loc;
    }
    for finding in findings {
        let idx = *index_of
            .get(finding.path.as_str())
            .ok_or_else(|| ReportError::UnknownPath(finding.path.clone()))?;
        *report.buckets[idx].counts.entry(finding.kind).or_default() += 1;
    }
    report.recompute_totals();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalizedSummary {
    /// Row total divided by the number of files.
    pub per_file: Option<BTreeMap<SmellKind, f64>>,
    /// Row total divided by total effective loc.
    pub per_loc: Option<BTreeMap<SmellKind, f64>>,
    /// Per bucket: count divided by that bucket's loc.
    pub per_bucket_per_loc: Option<Vec<BTreeMap<SmellKind, f64>>>,
    pub warnings: Vec<String>,
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

pub fn normalize(report: &BucketReport, mode: Normalization) -> NormalizedSummary {
    let mut summary = NormalizedSummary::default();
    if report.files_total == 0 {
        summary
            .warnings
            .push("empty corpus: no files scanned, ratios reported as 0".into());
    } else if report.loc_total == 0 && mode.includes_per_loc() {
        summary
            .warnings
            .push("corpus has no effective lines, per-loc ratios reported as 0".into());
    }
    let per = |d: usize| -> BTreeMap<SmellKind, f64> {
        report
            .row_totals
            .iter()
            .map(|(&k, &n)| (k, ratio(n, d)))
            .collect()
    };
    if mode.includes_per_file() {
        summary.per_file = Some(per(report.files_total));
    }
    if mode.includes_per_loc() {
        summary.per_loc = Some(per(report.loc_total));
        summary.per_bucket_per_loc = Some(
            report
                .buckets
                .iter()
                .map(|b| {
                    b.counts
                        .iter()
                        .map(|(&k, &n)| (k, ratio(n, b.loc)))
                        .collect()
                })
                .collect(),
        );
    }
    summary
}

/// A ratio rendered with exactly three decimals in every format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio(pub f64);

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(fmt_ratio(self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Ratio)
    }
}

pub fn fmt_ratio(value: f64) -> String {
    format!("{value:.3}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonNormalized {
    pub per_file: Option<BTreeMap<SmellKind, Ratio>>,
    pub per_loc: Option<BTreeMap<SmellKind, Ratio>>,
    pub per_bucket_per_loc: Option<Vec<BTreeMap<SmellKind, Ratio>>>,
}

/// The JSON report document. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub version: String,
    pub config_echo: ScanConfig,
    pub files_total: usize,
    pub loc_total: usize,
    pub findings: Vec<SmellFinding>,
    pub buckets: Vec<Bucket>,
    pub row_totals: KindCounts,
    pub grand_total: usize,
    pub normalized: JsonNormalized,
}

impl JsonReport {
    /// Rebuilds the bucket table from the document's bucket cells.
    pub fn to_bucket_report(&self) -> BucketReport {
        let mut report = BucketReport {
            buckets: self.buckets.clone(),
            row_totals: KindCounts::new(),
            grand_total: 0,
            files_total: 0,
            loc_total: 0,
        };
        report.recompute_totals();
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Everything a serializer needs.
#[derive(Debug, Clone, Copy)]
pub struct ReportData<'a> {
    pub config: &'a ScanConfig,
    pub findings: &'a [SmellFinding],
    pub buckets: &'a BucketReport,
    pub summary: &'a NormalizedSummary,
}

fn to_ratios(map: &BTreeMap<SmellKind, f64>) -> BTreeMap<SmellKind, Ratio> {
    map.iter().map(|(&k, &v)| (k, Ratio(v))).collect()
}

pub fn render_json(data: &ReportData<'_>) -> Result<String, ReportError> {
    let doc = JsonReport {
        version: REPORT_VERSION.to_string(),
        config_echo: data.config.clone(),
        files_total: data.buckets.files_total,
        loc_total: data.buckets.loc_total,
        findings: data.findings.to_vec(),
        buckets: data.buckets.buckets.clone(),
        row_totals: data.buckets.row_totals.clone(),
        grand_total: data.buckets.grand_total,
        normalized: JsonNormalized {
            per_file: data.summary.per_file.as_ref().map(to_ratios),
            per_loc: data.summary.per_loc.as_ref().map(to_ratios),
            per_bucket_per_loc: data
                .summary
                .per_bucket_per_loc
                .as_ref()
                .map(|v| v.iter().map(to_ratios).collect()),
        },
    };
    let mut out = serde_json::to_string_pretty(&doc)?;
    out.push('\n');
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        csv_quoted(s)
    } else {
        s.to_string()
    }
}

fn csv_quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// The three CSV tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTables {
    pub findings: String,
    pub buckets: String,
    pub normalized: String,
}

pub fn render_csv(data: &ReportData<'_>) -> CsvTables {
    let mut findings = String::from("kind,path,start_line,end_line,unit,message\n");
    for f in data.findings {
        let _ = writeln!(
            findings,
            "{},{},{},{},{},{}",
            f.kind,
            csv_field(&f.path),
            f.start_line,
            f.end_line,
            csv_field(f.unit.as_deref().unwrap_or("")),
            csv_quoted(&f.message)
        );
    }

    let report = data.buckets;
    let mut buckets = String::from("kind");
    for b in &report.buckets {
        let _ = write!(buckets, ",{}", b.label());
    }
    buckets.push_str(",total\n");
    for kind in SmellKind::ALL {
        let _ = write!(buckets, "{kind}");
        for b in &report.buckets {
            let _ = write!(buckets, ",{}", b.counts[&kind]);
        }
        let _ = writeln!(buckets, ",{}", report.row_totals[&kind]);
    }
    let _ = write!(buckets, "files");
    for b in &report.buckets {
        let _ = write!(buckets, ",{}", b.files);
    }
    let _ = writeln!(buckets, ",{}", report.files_total);
    let _ = write!(buckets, "loc");
    for b in &report.buckets {
        let _ = write!(buckets, ",{}", b.loc);
    }
    let _ = writeln!(buckets, ",{}", report.loc_total);
    if let (Some(series), Some(per_loc)) = (&data.summary.per_bucket_per_loc, &data.summary.per_loc)
    {
        for kind in SmellKind::ALL {
            let _ = write!(buckets, "{kind} per loc");
            for cell in series {
                let _ = write!(buckets, ",{}", fmt_ratio(cell[&kind]));
            }
            let _ = writeln!(buckets, ",{}", fmt_ratio(per_loc[&kind]));
        }
    }

    let mut normalized = String::from("kind,count,per_file,per_loc\n");
    let cell = |map: &Option<BTreeMap<SmellKind, f64>>, kind| {
        map.as_ref()
            .map(|m| fmt_ratio(m[&kind]))
            .unwrap_or_default()
    };
    for kind in SmellKind::ALL {
        let _ = writeln!(
            normalized,
            "{kind},{},{},{}",
            report.row_totals[&kind],
            cell(&data.summary.per_file, kind),
            cell(&data.summary.per_loc, kind)
        );
    }
    CsvTables {
        findings,
        buckets,
        normalized,
    }
}

/// Left-aligns the first column and right-aligns the rest.
fn aligned(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn render_text(data: &ReportData<'_>) -> String {
    let report = data.buckets;
    let mut out = String::new();

    let _ = writeln!(out, "Findings: {}", data.findings.len());
    for f in data.findings {
        let lines = if f.start_line == f.end_line {
            f.start_line.to_string()
        } else {
            format!("{}-{}", f.start_line, f.end_line)
        };
        let _ = writeln!(
            out,
            "  {}:{}  [{}]  {}",
            f.path,
            lines,
            f.kind.title(),
            f.message
        );
    }

    let _ = writeln!(out, "\nSmell counts by file size (effective loc)");
    let mut header = vec!["smell".to_string()];
    header.extend(report.buckets.iter().map(Bucket::label));
    header.push("total".into());
    let mut rows = vec![header];
    for kind in SmellKind::ALL {
        let mut row = vec![kind.title().to_string()];
        row.extend(report.buckets.iter().map(|b| b.counts[&kind].to_string()));
        row.push(report.row_totals[&kind].to_string());
        rows.push(row);
    }
    let mut files = vec!["number of files".to_string()];
    files.extend(report.buckets.iter().map(|b| b.files.to_string()));
    files.push(report.files_total.to_string());
    rows.push(files);
    let mut loc = vec!["number of lines".to_string()];
    loc.extend(report.buckets.iter().map(|b| b.loc.to_string()));
    loc.push(report.loc_total.to_string());
    rows.push(loc);
    out.push_str(&aligned(&rows));

    let _ = writeln!(
        out,
        "\nNormalized counts (files={}, loc={}, smells={})",
        report.files_total, report.loc_total, report.grand_total
    );
    let mut rows = vec![vec![
        "smell".into(),
        "count".into(),
        "per file".into(),
        "per loc".into(),
    ]];
    for kind in SmellKind::ALL {
        let cell = |m: &Option<BTreeMap<SmellKind, f64>>| {
            m.as_ref().map_or("-".into(), |m| fmt_ratio(m[&kind]))
        };
        rows.push(vec![
            kind.title().to_string(),
            report.row_totals[&kind].to_string(),
            cell(&data.summary.per_file),
            cell(&data.summary.per_loc),
        ]);
    }
    out.push_str(&aligned(&rows));

    if let Some(series) = &data.summary.per_bucket_per_loc {
        let _ = writeln!(out, "\nSmells per effective loc, by file size");
        let mut header = vec!["smell".to_string()];
        header.extend(report.buckets.iter().map(Bucket::label));
        let mut rows = vec![header];
        for kind in SmellKind::ALL {
            let mut row = vec![kind.title().to_string()];
            row.extend(series.iter().map(|cell| fmt_ratio(cell[&kind])));
            rows.push(row);
        }
        out.push_str(&aligned(&rows));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    /// A file for text and JSON; a directory for CSV.
    Path(PathBuf),
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    std::fs::write(path, contents)?;
    Ok(())
}

/// Serializes the report. CSV goes to stdout as the three tables separated
/// by blank lines, or to `findings.csv`, `buckets.csv` and `normalized.csv`
/// inside the destination directory.
pub fn emit(
    data: &ReportData<'_>,
    format: Format,
    destination: &Destination,
) -> Result<(), ReportError> {
    match (format, destination) {
        (Format::Csv, Destination::Path(dir)) => {
            let tables = render_csv(data);
            std::fs::create_dir_all(dir)?;
            write_file(&dir.join("findings.csv"), &tables.findings)?;
            write_file(&dir.join("buckets.csv"), &tables.buckets)?;
            write_file(&dir.join("normalized.csv"), &tables.normalized)
        }
        (_, Destination::Path(path)) => write_file(path, &render_single(data, format)?),
        (_, Destination::Stdout) => {
            let text = render_single(data, format)?;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// The report as one string; CSV tables are joined by blank lines.
pub fn render_single(data: &ReportData<'_>, format: Format) -> Result<String, ReportError> {
    Ok(match format {
        Format::Text => render_text(data),
        Format::Json => render_json(data)?,
        Format::Csv => {
            let t = render_csv(data);
            format!("{}\n{}\n{}", t.findings, t.buckets, t.normalized)
        }
    })
}
