//! Scan configuration: detector thresholds, file selection and the
//! plain-text `key = value` config file format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Default include pattern: every Python source file under the root.
pub const DEFAULT_INCLUDE: &str = "**/*.py";

/// Every numeric constant the detectors compare against.
///
/// All comparisons are strict: a unit is reported only when its measure is
/// greater than the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub long_statement_words: usize,
    pub long_class_lines: usize,
    pub long_method_lines: usize,
    pub long_loop_lines: usize,
    pub long_conditional_lines: usize,
    pub max_parameters: usize,
    pub duplicate_window_lines: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            long_statement_words: 20,
            long_class_lines: 60,
            long_method_lines: 40,
            long_loop_lines: 20,
            long_conditional_lines: 10,
            max_parameters: 5,
            duplicate_window_lines: 3,
        }
    }
}

impl Thresholds {
    fn fields(&self) -> [(&'static str, usize); 7] {
        [
            ("long_statement_words", self.long_statement_words),
            ("long_class_lines", self.long_class_lines),
            ("long_method_lines", self.long_method_lines),
            ("long_loop_lines", self.long_loop_lines),
            ("long_conditional_lines", self.long_conditional_lines),
            ("max_params", self.max_parameters),
            ("dup_window", self.duplicate_window_lines),
        ]
    }

    /// Every threshold must be at least 1.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.fields().iter().find(|(_, v)| *v == 0) {
            Some((key, _)) => Err(ConfigError::ZeroThreshold(key)),
            None => Ok(()),
        }
    }
}

/// Scope used by the two cross-unit duplicate rules (repetitive code and
/// same-name functions).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicateScope {
    #[default]
    PerFile,
    CorpusWide,
}

impl FromStr for DuplicateScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "file" | "per_file" => Ok(Self::PerFile),
            "corpus" | "corpus_wide" => Ok(Self::CorpusWide),
            other => Err(format!("unknown scope `{other}` (expected file or corpus)")),
        }
    }
}

/// Which denominators the normalized summary is computed against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    PerFile,
    PerLoc,
    #[default]
    Both,
}

impl Normalization {
    pub fn includes_per_file(self) -> bool {
        matches!(self, Self::PerFile | Self::Both)
    }

    pub fn includes_per_loc(self) -> bool {
        matches!(self, Self::PerLoc | Self::Both)
    }
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_file" | "file" => Ok(Self::PerFile),
            "per_loc" | "loc" => Ok(Self::PerLoc),
            "both" => Ok(Self::Both),
            other => Err(format!(
                "unknown normalization `{other}` (expected per_file, per_loc or both)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub root_path: PathBuf,
    pub include_globs: Vec<String>,
    pub exclude_globs: Vec<String>,
    pub thresholds: Thresholds,
    pub duplicate_scope: DuplicateScope,
    pub normalization: Normalization,
}

impl ScanConfig {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root_path: root.into(),
            include_globs: vec![DEFAULT_INCLUDE.to_string()],
            exclude_globs: Vec::new(),
            thresholds: Thresholds::default(),
            duplicate_scope: DuplicateScope::default(),
            normalization: Normalization::default(),
        }
    }

    /// Applies a partial config on top of this one. Present fields win.
    pub fn apply(&mut self, partial: &PartialConfig) {
        let t = &mut self.thresholds;
        let p = &partial.thresholds;
        set(&mut t.long_statement_words, p.long_statement_words);
        set(&mut t.long_class_lines, p.long_class_lines);
        set(&mut t.long_method_lines, p.long_method_lines);
        set(&mut t.long_loop_lines, p.long_loop_lines);
        set(&mut t.long_conditional_lines, p.long_conditional_lines);
        set(&mut t.max_parameters, p.max_parameters);
        set(&mut t.duplicate_window_lines, p.duplicate_window_lines);
        set(&mut self.duplicate_scope, partial.duplicate_scope);
        set(&mut self.normalization, partial.normalization);
        if !partial.include_globs.is_empty() {
            self.include_globs = partial.include_globs.clone();
        }
        if !partial.exclude_globs.is_empty() {
            self.exclude_globs = partial.exclude_globs.clone();
        }
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PartialThresholds {
    pub long_statement_words: Option<usize>,
    pub long_class_lines: Option<usize>,
    pub long_method_lines: Option<usize>,
    pub long_loop_lines: Option<usize>,
    pub long_conditional_lines: Option<usize>,
    pub max_parameters: Option<usize>,
    pub duplicate_window_lines: Option<usize>,
}

/// A config layer where every field is optional. Layers are applied
/// defaults, then config file, then command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialConfig {
    pub thresholds: PartialThresholds,
    pub duplicate_scope: Option<DuplicateScope>,
    pub normalization: Option<Normalization>,
    pub include_globs: Vec<String>,
    pub exclude_globs: Vec<String>,
}

/// Parses the `key = value` config format. Keys mirror the long flag names
/// with `_` in place of `-`; `include` and `exclude` may repeat.
pub fn parse_config(text: &str) -> Result<PartialConfig, ConfigError> {
    let mut out = PartialConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line: line_no,
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let th = &mut out.thresholds;
        let slot = match key {
            "long_statement_words" => Some(&mut th.long_statement_words),
            "long_class_lines" => Some(&mut th.long_class_lines),
            "long_method_lines" => Some(&mut th.long_method_lines),
            "long_loop_lines" => Some(&mut th.long_loop_lines),
            "long_conditional_lines" => Some(&mut th.long_conditional_lines),
            "max_params" | "max_parameters" => Some(&mut th.max_parameters),
            "dup_window" | "duplicate_window_lines" => Some(&mut th.duplicate_window_lines),
            _ => None,
        };
        if let Some(slot) = slot {
            *slot = Some(parse_count(value, line_no)?);
            continue;
        }
        match key {
            "scope" => out.duplicate_scope = Some(parse_enum(value, line_no)?),
            "normalization" => out.normalization = Some(parse_enum(value, line_no)?),
            "include" => out.include_globs.push(value.to_string()),
            "exclude" => out.exclude_globs.push(value.to_string()),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                })
            }
        }
    }
    Ok(out)
}

pub fn load_config_file(path: &Path) -> Result<PartialConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn parse_count(value: &str, line: usize) -> Result<usize, ConfigError> {
    match value.parse::<usize>() {
        Ok(0) => Err(ConfigError::Malformed {
            line,
            message: "threshold must be at least 1".into(),
        }),
        Ok(n) => Ok(n),
        Err(_) => Err(ConfigError::Malformed {
            line,
            message: format!("`{value}` is not a positive integer"),
        }),
    }
}

fn parse_enum<T: FromStr<Err = String>>(value: &str, line: usize) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|message| ConfigError::Malformed { line, message })
}

impl fmt::Display for DuplicateScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PerFile => "per_file",
            Self::CorpusWide => "corpus_wide",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let partial = parse_config("").unwrap();
        let mut config = ScanConfig::new("src");
        config.apply(&partial);
        assert_eq!(config.thresholds, Thresholds::default());
        assert_eq!(config.include_globs, vec![DEFAULT_INCLUDE.to_string()]);
    }

    #[test]
    fn single_override() {
        let partial = parse_config("long_class_lines = 80\n").unwrap();
        let mut config = ScanConfig::new(".");
        config.apply(&partial);
        assert_eq!(config.thresholds.long_class_lines, 80);
        assert_eq!(
            Thresholds {
                long_class_lines: 60,
                ..config.thresholds
            },
            Thresholds::default()
        );
    }

    #[test]
    fn bad_value_names_line() {
        let err = parse_config("long_class_lines = banana").unwrap_err();
        assert!(
            matches!(err, ConfigError::Malformed { line: 1, .. }),
            "{err:?}"
        );
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("# c\n\nwibble = 3").unwrap_err();
        match err {
            ConfigError::UnknownKey { line, key } => {
                assert_eq!(line, 3);
                assert_eq!(key, "wibble");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_equals_and_zero() {
        assert!(matches!(
            parse_config("max_params 5"),
            Err(ConfigError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("dup_window = 0"),
            Err(ConfigError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn scope_globs_and_normalization() {
        let p = parse_config("scope = corpus\ninclude = src/**/*.py\ninclude = *.pyw\nexclude = **/tests/**\nnormalization = per_loc").unwrap();
        assert_eq!(p.duplicate_scope, Some(DuplicateScope::CorpusWide));
        assert_eq!(p.include_globs.len(), 2);
        assert_eq!(p.exclude_globs, vec!["**/tests/**".to_string()]);
        assert_eq!(p.normalization, Some(Normalization::PerLoc));
    }

    #[test]
    fn zero_threshold_rejected() {
        let t = Thresholds {
            max_parameters: 0,
            ..Thresholds::default()
        };
        assert!(t.validate().is_err());
        assert!(Thresholds::default().validate().is_ok());
    }
}
