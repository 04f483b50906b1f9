//! File discovery, byte-level sanitization and comment/blank stripping.

use std::fmt;
use std::path::{Component, Path};

use globset::{Glob, GlobSet, GlobSetBuilder};
use walkdir::WalkDir;

use crate::config::ScanConfig;
use crate::error::{ConfigError, ScanError};
use crate::line_model::LineRecord;

const UNDECODABLE: &str = "undecodable bytes";

/// One diagnostic produced while scanning. Rendered one per line on the
/// diagnostic stream.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScanEvent {
    Noise {
        path: String,
        line: usize,
        reason: String,
    },
    Skip {
        path: String,
        reason: String,
    },
    Warn {
        path: String,
        line: Option<usize>,
        message: String,
    },
}

impl ScanEvent {
    fn sort_key(&self) -> (&str, usize, u8) {
        match self {
            Self::Skip { path, .. } => (path, 0, 0),
            Self::Noise { path, line, .. } => (path, *line, 1),
            Self::Warn { path, line, .. } => (path, line.unwrap_or(0), 2),
        }
    }
}

impl fmt::Display for ScanEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Noise { path, line, reason } => write!(f, "NOISE {path}:{line} {reason}"),
            Self::Skip { path, reason } => write!(f, "SKIP {path} {reason}"),
            Self::Warn {
                path,
                line: Some(line),
                message,
            } => write!(f, "WARN {path}:{line} {message}"),
            Self::Warn {
                path,
                line: None,
                message,
            } => write!(f, "WARN {path} {message}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanLog {
    pub events: Vec<ScanEvent>,
}

impl ScanLog {
    pub fn push(&mut self, event: ScanEvent) {
        self.events.push(event);
    }

    pub fn extend(&mut self, events: impl IntoIterator<Item = ScanEvent>) {
        self.events.extend(events);
    }

    /// Orders events by path, then line, independent of worker scheduling.
    pub fn sort(&mut self) {
        self.events
            .sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.cmp(b)));
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn render(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Path relative to the scan root, `/`-separated.
    pub path: String,
    pub raw_lines: Vec<String>,
    /// `(line_number, reason)` for every line that needed repair.
    pub sanitization_log: Vec<(usize, String)>,
    /// Set by [`strip_comments_and_blanks`].
    pub effective_loc: usize,
}

impl SourceFile {
    pub fn noise_events(&self) -> impl Iterator<Item = ScanEvent> + '_ {
        self.sanitization_log
            .iter()
            .map(|(line, reason)| ScanEvent::Noise {
                path: self.path.clone(),
                line: *line,
                reason: reason.clone(),
            })
    }
}

fn build_globset(patterns: &[String]) -> Result<GlobSet, ConfigError> {
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|e| ConfigError::Glob {
            pattern: pattern.clone(),
            message: e.kind().to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| ConfigError::Glob {
        pattern: patterns.join(", "),
        message: e.to_string(),
    })
}

fn relative_string(path: &Path) -> String {
    path.components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy()),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join("/")
}

/// Lists every regular file under the root that matches an include glob and
/// no exclude glob, sorted by relative path. Symlinks are not followed.
pub fn discover_files(config: &ScanConfig, log: &mut ScanLog) -> Result<Vec<String>, ScanError> {
    let root = &config.root_path;
    let meta = std::fs::metadata(root).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => ScanError::RootMissing(root.clone()),
        _ => ScanError::RootUnreadable {
            path: root.clone(),
            source,
        },
    })?;
    if !meta.is_dir() {
        return Err(ScanError::RootNotDirectory(root.clone()));
    }
    std::fs::read_dir(root).map_err(|source| ScanError::RootUnreadable {
        path: root.clone(),
        source,
    })?;

    let include = build_globset(&config.include_globs)?;
    let exclude = build_globset(&config.exclude_globs)?;

    let mut found = Vec::new();
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = match entry {
            Ok(entry) => entry,
            Err(err) => {
                let path = err
                    .path()
                    .and_then(|p| p.strip_prefix(root).ok())
                    .map(relative_string)
                    .unwrap_or_default();
                let reason = err
                    .io_error()
                    .map_or_else(|| err.to_string(), |io| io.to_string());
                log.push(ScanEvent::Skip { path, reason });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let Ok(rel) = entry.path().strip_prefix(root) else {
            continue;
        };
        let rel = relative_string(rel);
        if include.is_match(&rel) && !exclude.is_match(&rel) {
            found.push(rel);
        }
    }
    found.sort();
    Ok(found)
}

/// Decodes raw bytes into lines. Invalid UTF-8 is replaced and logged per
/// line; the number of physical lines is never changed.
pub fn sanitize(path: &str, bytes: &[u8]) -> SourceFile {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut segments: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    if segments.last().is_some_and(|s| s.is_empty()) {
        segments.pop();
    }

    let mut raw_lines = Vec::with_capacity(segments.len());
    let mut sanitization_log = Vec::new();
    for (idx, segment) in segments.into_iter().enumerate() {
        let segment = segment.strip_suffix(b"\r").unwrap_or(segment);
        match std::str::from_utf8(segment) {
            Ok(text) => raw_lines.push(text.to_string()),
            Err(_) => {
                raw_lines.push(String::from_utf8_lossy(segment).into_owned());
                sanitization_log.push((idx + 1, UNDECODABLE.to_string()));
            }
        }
    }
    SourceFile {
        path: path.to_string(),
        raw_lines,
        sanitization_log,
        effective_loc: 0,
    }
}

pub fn load_and_sanitize(root: &Path, rel: &str) -> std::io::Result<SourceFile> {
    let bytes = std::fs::read(root.join(rel))?;
    Ok(sanitize(rel, &bytes))
}

#[derive(Debug, Clone, Copy)]
struct OpenString {
    quote: char,
    triple: bool,
    /// Opened at statement position; a documentation string if nothing
    /// but whitespace or a comment follows its closing quote.
    doc_start: Option<usize>,
}

#[derive(Debug, Default)]
struct QuoteScanner {
    string: Option<OpenString>,
    depth: usize,
    backslash: bool,
}

/// Result of scanning one physical line.
struct ScannedLine {
    code: String,
    continuation: bool,
    /// Index of the opening line of a documentation string that closed on
    /// this line with nothing after it.
    doc_closed: Option<usize>,
    /// The line is part of a documentation string that is still open.
    in_doc: bool,
}

fn string_prefix_len(s: &str) -> usize {
    s.chars()
        .take(3)
        .take_while(|c| matches!(c, 'r' | 'R' | 'b' | 'B' | 'u' | 'U' | 'f' | 'F'))
        .count()
}

impl QuoteScanner {
    fn scan(&mut self, idx: usize, line: &str) -> ScannedLine {
        let continuation = self.string.is_some() || self.depth > 0 || self.backslash;
        self.backslash = false;

        // Statement-position string literal.
        let mut doc_quote_at = None;
        if !continuation {
            let trimmed = line.trim_start();
            let lead = line.len() - trimmed.len();
            let prefix = string_prefix_len(trimmed);
            if trimmed[prefix..].starts_with(['"', '\'']) {
                doc_quote_at = Some(lead + prefix);
            }
        }

        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut code_end = line.len();
        let mut doc_closed_here: Option<usize> = None;
        let mut trailing_code = false;
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if let Some(open) = self.string {
                if c == '\\' {
                    i += 2;
                    continue;
                }
                if c == open.quote {
                    let run = chars[i..]
                        .iter()
                        .take_while(|(_, ch)| *ch == open.quote)
                        .count();
                    if !open.triple {
                        self.string = None;
                        i += 1;
                    } else if run >= 3 {
                        self.string = None;
                        i += 3;
                    } else {
                        i += run;
                        continue;
                    }
                    if let Some(start) = open.doc_start {
                        doc_closed_here = Some(start);
                        trailing_code = false;
                    }
                    continue;
                }
                i += 1;
                continue;
            }

            if doc_closed_here.is_some() && !c.is_whitespace() && c != '#' {
                trailing_code = true;
            }
            match c {
                '#' => {
                    code_end = pos;
                    break;
                }
                '"' | '\'' => {
                    let triple = chars.get(i + 1).map(|x| x.1) == Some(c)
                        && chars.get(i + 2).map(|x| x.1) == Some(c);
                    let doc_start = (doc_quote_at == Some(pos)).then_some(idx);
                    self.string = Some(OpenString {
                        quote: c,
                        triple,
                        doc_start,
                    });
                    i += if triple { 3 } else { 1 };
                    continue;
                }
                '(' | '[' | '{' => self.depth += 1,
                ')' | ']' | '}' => self.depth = self.depth.saturating_sub(1),
                '\\' if line[pos + 1..].trim().is_empty() => self.backslash = true,
                _ => {}
            }
            i += 1;
        }

        // A short string left open at end of line is unterminated unless
        // its newline was escaped.
        if let Some(open) = self.string {
            if !open.triple && !line.ends_with('\\') {
                self.string = None;
            }
        }

        let in_doc = self.string.is_some_and(|s| s.doc_start.is_some());
        let doc_closed = doc_closed_here.filter(|_| !trailing_code && !in_doc);
        ScannedLine {
            code: line[..code_end].trim_end().to_string(),
            continuation,
            doc_closed,
            in_doc,
        }
    }
}

/// Returns the effective lines of a file and records their count in
/// `file.effective_loc`.
///
/// Removed: blank lines, full-line comments, trailing comments (a `#`
/// outside any string literal), and documentation strings (string literals
/// standing alone at statement position, including all their lines).
pub fn strip_comments_and_blanks(file: &mut SourceFile) -> Vec<LineRecord> {
    let lines = effective_lines(&file.raw_lines);
    file.effective_loc = lines.len();
    lines
}

fn effective_lines(raw_lines: &[String]) -> Vec<LineRecord> {
    let mut scanner = QuoteScanner::default();
    let mut out: Vec<LineRecord> = Vec::new();
    // Lines held back while a statement-position string is open.
    let mut held: Vec<(usize, ScannedLine)> = Vec::new();

    for (idx, raw) in raw_lines.iter().enumerate() {
        let scanned = scanner.scan(idx, raw);
        if scanned.in_doc {
            held.push((idx, scanned));
            continue;
        }
        if let Some(start) = scanned.doc_closed {
            // Whole documentation string, from its opening line to here.
            held.retain(|(i, _)| *i < start);
            flush(&mut held, &mut out);
            continue;
        }
        held.push((idx, scanned));
        flush(&mut held, &mut out);
    }
    // An unterminated statement-position string runs to end of file.
    held.retain(|(_, s)| !s.in_doc);
    flush(&mut held, &mut out);
    out
}

fn flush(held: &mut Vec<(usize, ScannedLine)>, out: &mut Vec<LineRecord>) {
    for (idx, line) in held.drain(..) {
        if !line.code.trim().is_empty() {
            out.push(LineRecord::new(idx + 1, line.code, line.continuation));
        }
    }
}

/// First physical line whose indentation conflicts (tabs vs. spaces) with
/// indentation seen earlier in the file.
pub fn mixed_indentation_line(lines: &[LineRecord]) -> Option<usize> {
    let mut seen_tab = false;
    let mut seen_space = false;
    for line in lines.iter().filter(|l| !l.continuation) {
        let lead: String = line
            .text
            .chars()
            .take_while(|c| c.is_whitespace())
            .collect();
        let tab = lead.contains('\t');
        let space = lead.contains(' ');
        if (tab && space) || (tab && seen_space) || (space && seen_tab) {
            return Some(line.physical_line);
        }
        seen_tab |= tab;
        seen_space |= space;
    }
    None
}
