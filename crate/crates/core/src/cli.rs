//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 smells found with `--fail-on-smell`, 2 usage or
//! config error, 3 fatal I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{load_config_file, DuplicateScope, Normalization, PartialConfig, ScanConfig};
use crate::error::ScanError;
use crate::pipeline::scan;
use crate::report::{emit, Destination, Format, ReportData};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SMELLS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    File,
    Corpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    PerFile,
    PerLoc,
    Both,
}

/// Detect code smells in a tree of Python source files.
#[derive(Debug, Parser)]
#[command(name = "smellscan", version)]
pub struct CliInvocation {
    /// Directory to scan.
    pub root: PathBuf,

    /// Config file with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,

    /// Output file (a directory for csv). Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Scope of the repetitive-code and same-name rules.
    #[arg(long, value_enum)]
    pub scope: Option<ScopeArg>,

    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,

    #[arg(long, value_name = "N", value_parser = positive)]
    pub long_statement_words: Option<usize>,
    #[arg(long, value_name = "N", value_parser = positive)]
    pub long_class_lines: Option<usize>,
    #[arg(long, value_name = "N", value_parser = positive)]
    pub long_method_lines: Option<usize>,
    #[arg(long, value_name = "N", value_parser = positive)]
    pub long_loop_lines: Option<usize>,
    #[arg(long, value_name = "N", value_parser = positive)]
    pub long_conditional_lines: Option<usize>,
    #[arg(long, value_name = "N", value_parser = positive)]
    pub max_params: Option<usize>,
    #[arg(long, value_name = "N", value_parser = positive)]
    pub dup_window: Option<usize>,

    /// Include glob, matched against paths relative to the root (repeatable).
    #[arg(long = "include", value_name = "GLOB")]
    pub include: Vec<String>,

    /// Exclude glob (repeatable).
    #[arg(long = "exclude", value_name = "GLOB")]
    pub exclude: Vec<String>,

    /// Exit with status 1 when any smell is found.
    #[arg(long)]
    pub fail_on_smell: bool,

    /// Suppress the diagnostic stream.
    #[arg(long)]
    pub quiet: bool,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N", value_parser = positive)]
    pub jobs: Option<usize>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

impl CliInvocation {
    fn flag_layer(&self) -> PartialConfig {
        let mut layer = PartialConfig::default();
        let t = &mut layer.thresholds;
        t.long_statement_words = self.long_statement_words;
        t.long_class_lines = self.long_class_lines;
        t.long_method_lines = self.long_method_lines;
        t.long_loop_lines = self.long_loop_lines;
        t.long_conditional_lines = self.long_conditional_lines;
        t.max_parameters = self.max_params;
        t.duplicate_window_lines = self.dup_window;
        layer.duplicate_scope = self.scope.map(|s| match s {
            ScopeArg::File => DuplicateScope::PerFile,
            ScopeArg::Corpus => DuplicateScope::CorpusWide,
        });
        layer.normalization = self.normalization.map(|n| match n {
            NormalizationArg::PerFile => Normalization::PerFile,
            NormalizationArg::PerLoc => Normalization::PerLoc,
            NormalizationArg::Both => Normalization::Both,
        });
        layer.include_globs = self.include.clone();
        layer.exclude_globs = self.exclude.clone();
        layer
    }

    /// Defaults, then the config file, then flags.
    pub fn scan_config(&self) -> Result<ScanConfig, crate::error::ConfigError> {
        let mut config = ScanConfig::new(&self.root);
        if let Some(path) = &self.config {
            config.apply(&load_config_file(path)?);
        }
        config.apply(&self.flag_layer());
        config.thresholds.validate()?;
        Ok(config)
    }
}

fn scan_error_code(err: &ScanError) -> i32 {
    match err {
        ScanError::Config(_) => EXIT_USAGE,
        _ => EXIT_IO,
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let invocation = match CliInvocation::try_parse_from(args) {
        Ok(inv) => inv,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return code;
        }
    };
    execute(&invocation)
}

pub fn execute(invocation: &CliInvocation) -> i32 {
    let mut stderr = std::io::stderr().lock();
    let config = match invocation.scan_config() {
        Ok(config) => config,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            return EXIT_USAGE;
        }
    };

    let result = match scan(&config, invocation.jobs) {
        Ok(result) => result,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            return scan_error_code(&err);
        }
    };

    if !invocation.quiet {
        let _ = stderr.write_all(result.log.render().as_bytes());
        for warning in &result.summary.warnings {
            let _ = writeln!(stderr, "WARN {warning}");
        }
    }

    let format = match invocation.format {
        FormatArg::Text => Format::Text,
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let destination = invocation
        .out
        .clone()
        .map_or(Destination::Stdout, Destination::Path);
    let data = ReportData {
        config: &config,
        findings: &result.findings,
        buckets: &result.report,
        summary: &result.summary,
    };
    if let Err(err) = emit(&data, format, &destination) {
        let _ = writeln!(stderr, "error: {err}");
        return EXIT_IO;
    }

    if invocation.fail_on_smell && result.report.grand_total > 0 {
        EXIT_SMELLS
    } else {
        EXIT_OK
    }
}
