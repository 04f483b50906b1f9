//! End-to-end scan: discover, load, model, detect, aggregate.

use rayon::prelude::*;

use crate::config::ScanConfig;
use crate::detectors::{run_all_detectors, FileModel, SmellFinding};
use crate::error::ScanError;
use crate::ingest::{
    discover_files, load_and_sanitize, mixed_indentation_line, strip_comments_and_blanks,
    ScanEvent, ScanLog, SourceFile,
};
use crate::line_model::{extract_blocks, walk_blocks};
use crate::report::{bucket_findings, normalize, BucketReport, NormalizedSummary};

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub files: Vec<SourceFile>,
    pub findings: Vec<SmellFinding>,
    pub report: BucketReport,
    pub summary: NormalizedSummary,
    pub log: ScanLog,
}

/// Strips, classifies and builds the block forest for one file, along
/// with the diagnostics it produced.
pub fn model_file(mut source: SourceFile) -> (FileModel, Vec<ScanEvent>) {
    let mut events: Vec<ScanEvent> = source.noise_events().collect();
    let lines = strip_comments_and_blanks(&mut source);
    if let Some(line) = mixed_indentation_line(&lines) {
        events.push(ScanEvent::Warn {
            path: source.path.clone(),
            line: Some(line),
            message: "mixed tab and space indentation".into(),
        });
    }
    let blocks = extract_blocks(&lines);
    for block in walk_blocks(&blocks) {
        if block.signature.as_ref().is_some_and(|s| !s.well_formed) {
            events.push(ScanEvent::Warn {
                path: source.path.clone(),
                line: Some(block.header_line),
                message: "malformed function signature".into(),
            });
        }
    }
    (
        FileModel {
            source,
            lines,
            blocks,
        },
        events,
    )
}

/// Runs everything after loading. Sources may arrive in any order.
pub fn analyze_sources(
    mut sources: Vec<SourceFile>,
    config: &ScanConfig,
    mut log: ScanLog,
) -> Result<ScanResult, ScanError> {
    sources.sort_by(|a, b| a.path.cmp(&b.path));
    let (models, events): (Vec<FileModel>, Vec<Vec<ScanEvent>>) =
        sources.into_par_iter().map(model_file).unzip();
    log.extend(events.into_iter().flatten());
    log.sort();

    let findings = run_all_detectors(&models, config);
    let files: Vec<SourceFile> = models.into_iter().map(|m| m.source).collect();
    let report = bucket_findings(&findings, &files)?;
    let summary = normalize(&report, config.normalization);
    Ok(ScanResult {
        files,
        findings,
        report,
        summary,
        log,
    })
}

fn scan_in_pool(config: &ScanConfig) -> Result<ScanResult, ScanError> {
    let mut log = ScanLog::default();
    let paths = discover_files(config, &mut log)?;
    let loaded: Vec<(String, std::io::Result<SourceFile>)> = paths
        .into_par_iter()
        .map(|rel| {
            let result = load_and_sanitize(&config.root_path, &rel);
            (rel, result)
        })
        .collect();
    let mut sources = Vec::with_capacity(loaded.len());
    for (path, result) in loaded {
        match result {
            Ok(source) => sources.push(source),
            Err(err) => log.push(ScanEvent::Skip {
                path,
                reason: err.to_string(),
            }),
        }
    }
    analyze_sources(sources, config, log)
}

/// Scans the tree at `config.root_path`.
///
/// `jobs` caps the worker count; `None` uses all available cores. The
/// result is identical for every value.
pub fn scan(config: &ScanConfig, jobs: Option<usize>) -> Result<ScanResult, ScanError> {
    config.thresholds.validate()?;
    match jobs {
        None => scan_in_pool(config),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ScanError::Pool(e.to_string()))?;
            pool.install(|| scan_in_pool(config))
        }
    }
}
