//! The eight smell rules.
//!
//! Per-file rules only look at one file's effective lines and block forest.
//! The two duplicate rules (repetitive code, same-name functions) take a
//! list of files so they can run either per file or over the whole corpus.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DuplicateScope, ScanConfig, Thresholds};
use crate::ingest::SourceFile;
use crate::line_model::{
    enclosing_units, join_logical_lines, walk_blocks, Block, BlockKind, LineKind, LineRecord,
    LogicalLine,
};

/// Smell categories, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SmellKind {
    RepetitiveCode,
    DeadCode,
    MultipleReturns,
    LongStatement,
    SameFunctionName,
    LongClassOrMethod,
    LongConditionalOrLoop,
    LongParameterList,
}

impl SmellKind {
    pub const ALL: [SmellKind; 8] = [
        SmellKind::RepetitiveCode,
        SmellKind::DeadCode,
        SmellKind::MultipleReturns,
        SmellKind::LongStatement,
        SmellKind::SameFunctionName,
        SmellKind::LongClassOrMethod,
        SmellKind::LongConditionalOrLoop,
        SmellKind::LongParameterList,
    ];

    /// Identifier used in CSV and JSON output.
    pub fn id(self) -> &'static str {
        match self {
            Self::RepetitiveCode => "RepetitiveCode",
            Self::DeadCode => "DeadCode",
            Self::MultipleReturns => "MultipleReturns",
            Self::LongStatement => "LongStatement",
            Self::SameFunctionName => "SameFunctionName",
            Self::LongClassOrMethod => "LongClassOrMethod",
            Self::LongConditionalOrLoop => "LongConditionalOrLoop",
            Self::LongParameterList => "LongParameterList",
        }
    }

    /// Human-readable name used in text output.
    pub fn title(self) -> &'static str {
        match self {
            Self::RepetitiveCode => "Repetitive Code",
            Self::DeadCode => "Dead Code",
            Self::MultipleReturns => "Multiple Return Statements",
            Self::LongStatement => "Long Statements",
            Self::SameFunctionName => "Multiple Same Function Names",
            Self::LongClassOrMethod => "Long Classes Or Methods",
            Self::LongConditionalOrLoop => "Long Conditionals or Loops",
            Self::LongParameterList => "Long Parameter List",
        }
    }
}

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmellFinding {
    pub kind: SmellKind,
    pub path: String,
    pub start_line: usize,
    pub end_line: usize,
    pub unit: Option<String>,
    pub message: String,
}

impl SmellFinding {
    fn new(
        kind: SmellKind,
        path: &str,
        (start_line, end_line): (usize, usize),
        unit: Option<String>,
        message: String,
    ) -> Self {
        debug_assert!(start_line <= end_line);
        Self {
            kind,
            path: path.to_string(),
            start_line,
            end_line,
            unit,
            message,
        }
    }

    /// Output order: path, start line, kind, then the remaining fields.
    pub fn sort_key(&self) -> impl Ord + '_ {
        (
            &self.path,
            self.start_line,
            self.kind,
            self.end_line,
            &self.unit,
            &self.message,
        )
    }
}

fn lines_label(start: usize, end: usize) -> String {
    if start == end {
        format!("line {start}")
    } else {
        format!("lines {start}-{end}")
    }
}

/// One parsed file: what every detector needs.
#[derive(Debug, Clone)]
pub struct FileModel {
    pub source: SourceFile,
    pub lines: Vec<LineRecord>,
    pub blocks: Vec<Block>,
}

impl FileModel {
    fn units(&self) -> Vec<Option<String>> {
        enclosing_units(self.lines.len(), &self.blocks)
    }
}

/// Flags every window of `window` consecutive effective lines whose
/// whitespace-trimmed text already occurred earlier (earlier file in the
/// list, or earlier position in the same file). Overlapping windows count
/// separately.
pub fn detect_repetitive_code(files: &[&FileModel], window: usize) -> Vec<SmellFinding> {
    assert!(window >= 1, "duplicate window must be at least 1");
    let mut seen: HashMap<Vec<&str>, (usize, usize)> = HashMap::new();
    let mut findings = Vec::new();
    for file in files {
        if file.lines.len() < window {
            continue;
        }
        let normalized: Vec<&str> = file.lines.iter().map(|l| l.text.trim()).collect();
        let units = file.units();
        for start in 0..=normalized.len() - window {
            let key = normalized[start..start + window].to_vec();
            let first_line = file.lines[start].physical_line;
            let last_line = file.lines[start + window - 1].physical_line;
            match seen.get(&key) {
                None => {
                    seen.insert(key, (first_line, last_line));
                }
                Some(&(orig_start, orig_end)) => {
                    let message = format!(
                        "Repetitive code in {}: repeats a block first seen at {}",
                        lines_label(first_line, last_line),
                        lines_label(orig_start, orig_end),
                    );
                    findings.push(SmellFinding::new(
                        SmellKind::RepetitiveCode,
                        &file.source.path,
                        (first_line, last_line),
                        units[start].clone(),
                        message,
                    ));
                }
            }
        }
    }
    findings
}

/// Index of the innermost block (in pre-order) that contains each line.
fn innermost_blocks(line_count: usize, forest: &[Block]) -> Vec<Option<&Block>> {
    let mut owner = vec![None; line_count];
    for block in walk_blocks(forest) {
        for slot in &mut owner[block.body.clone()] {
            *slot = Some(block);
        }
    }
    owner
}

/// Statements after a `return` at the same indentation, up to the first line
/// at a different indentation.
///
/// Considers every `return` whose innermost enclosing block is `block`.
pub fn detect_dead_code(
    path: &str,
    block: &Block,
    lines: &[LineRecord],
    owners: &[Option<&Block>],
    units: &[Option<String>],
) -> Vec<SmellFinding> {
    if block.kind == BlockKind::Class {
        return Vec::new();
    }
    let mut findings = Vec::new();
    let mut i = block.body.start;
    while i < block.body.end {
        let line = &lines[i];
        let owned = owners[i].is_some_and(|b| std::ptr::eq(b, block));
        if line.kind != LineKind::ReturnStmt || !owned {
            i += 1;
            continue;
        }
        // Skip the return's own continuation lines.
        let mut j = i + 1;
        while j < block.body.end && lines[j].continuation {
            j += 1;
        }
        let first_dead = j;
        while j < block.body.end
            && (lines[j].continuation || lines[j].lead_spaces == line.lead_spaces)
        {
            j += 1;
        }
        if j > first_dead {
            let span = (lines[first_dead].physical_line, lines[j - 1].physical_line);
            let message = format!(
                "Dead Code in {} after return at line {}",
                lines_label(span.0, span.1),
                line.physical_line
            );
            findings.push(SmellFinding::new(
                SmellKind::DeadCode,
                path,
                span,
                units[i].clone(),
                message,
            ));
        }
        i = j.max(i + 1);
    }
    findings
}

/// One finding for a function containing two or more `return` statements,
/// not counting those inside nested function definitions.
pub fn detect_multiple_returns(
    path: &str,
    function: &Block,
    lines: &[LineRecord],
) -> Option<SmellFinding> {
    if function.kind != BlockKind::Method {
        return None;
    }
    let mut excluded = vec![false; function.body.len()];
    for nested in function.children.iter().flat_map(Block::walk) {
        if nested.kind == BlockKind::Method {
            for idx in nested.span() {
                excluded[idx - function.body.start] = true;
            }
        }
    }
    let count = function
        .body
        .clone()
        .filter(|&idx| !excluded[idx - function.body.start])
        .filter(|&idx| lines[idx].kind == LineKind::ReturnStmt)
        .count();
    (count >= 2).then(|| {
        let name = function.name.clone().unwrap_or_default();
        SmellFinding::new(
            SmellKind::MultipleReturns,
            path,
            (function.header_line, function.body_end),
            function.name.clone(),
            format!("Multiple return statements in function {name} ({count} returns)"),
        )
    })
}

/// A statement (joined across continuation lines) with more words than the
/// threshold.
pub fn detect_long_statement(
    path: &str,
    statement: &LogicalLine,
    threshold: usize,
    unit: Option<String>,
) -> Option<SmellFinding> {
    (statement.word_count > threshold).then(|| {
        SmellFinding::new(
            SmellKind::LongStatement,
            path,
            (statement.first_line, statement.last_line),
            unit,
            format!(
                "Long statement found at {} ({} words)",
                lines_label(statement.first_line, statement.last_line),
                statement.word_count
            ),
        )
    })
}

/// A function signature located in a file, for same-name grouping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatedSignature<'a> {
    pub path: &'a str,
    pub header_line: usize,
    pub header_end_line: usize,
    pub name: &'a str,
    pub arity: usize,
}

/// Groups signatures by (name, arity) and flags every member after the
/// first in (path, header line) order.
pub fn detect_same_function_names(signatures: &[LocatedSignature<'_>]) -> Vec<SmellFinding> {
    let mut ordered: Vec<&LocatedSignature<'_>> = signatures.iter().collect();
    ordered.sort_by_key(|s| (s.path, s.header_line));
    let mut first_seen: HashMap<(&str, usize), &LocatedSignature<'_>> = HashMap::new();
    let mut findings = Vec::new();
    for sig in ordered {
        match first_seen.get(&(sig.name, sig.arity)) {
            None => {
                first_seen.insert((sig.name, sig.arity), sig);
            }
            Some(first) => {
                let location = if first.path == sig.path {
                    format!("line {}", first.header_line)
                } else {
                    format!("{}:{}", first.path, first.header_line)
                };
                findings.push(SmellFinding::new(
                    SmellKind::SameFunctionName,
                    sig.path,
                    (sig.header_line, sig.header_end_line),
                    Some(sig.name.to_string()),
                    format!(
                        "Function {} with {} parameter{} already defined at {location}",
                        sig.name,
                        sig.arity,
                        if sig.arity == 1 { "" } else { "s" }
                    ),
                ));
            }
        }
    }
    findings
}

fn block_threshold(kind: BlockKind, t: &Thresholds) -> usize {
    match kind {
        BlockKind::Class => t.long_class_lines,
        BlockKind::Method => t.long_method_lines,
        BlockKind::Loop => t.long_loop_lines,
        BlockKind::Conditional => t.long_conditional_lines,
    }
}

/// A block whose body has more effective lines than its kind's threshold.
///
/// `unit` names the enclosing function or class for loops and conditionals.
pub fn detect_long_block(
    path: &str,
    block: &Block,
    thresholds: &Thresholds,
    unit: Option<String>,
) -> Option<SmellFinding> {
    let n = block.body_effective_lines;
    if n <= block_threshold(block.kind, thresholds) {
        return None;
    }
    let kind = match block.kind {
        BlockKind::Class | BlockKind::Method => SmellKind::LongClassOrMethod,
        BlockKind::Loop | BlockKind::Conditional => SmellKind::LongConditionalOrLoop,
    };
    Some(SmellFinding::new(
        kind,
        path,
        (block.header_line, block.body_end),
        block.name.clone().or(unit),
        format!(
            "Long {} found at {} ({n} lines)",
            block.kind.label(),
            lines_label(block.header_line, block.body_end)
        ),
    ))
}

/// A function with more parameters than the threshold.
pub fn detect_long_parameter_list(
    path: &str,
    block: &Block,
    threshold: usize,
) -> Option<SmellFinding> {
    let sig = block.signature.as_ref()?;
    (sig.arity > threshold).then(|| {
        SmellFinding::new(
            SmellKind::LongParameterList,
            path,
            (block.header_line, block.header_end_line),
            Some(sig.name.clone()),
            format!(
                "Long parameter list in function {} ({} parameters)",
                sig.name, sig.arity
            ),
        )
    })
}

fn signatures_of(file: &FileModel) -> Vec<LocatedSignature<'_>> {
    walk_blocks(&file.blocks)
        .filter_map(|b| {
            let sig = b.signature.as_ref()?;
            sig.well_formed.then_some(LocatedSignature {
                path: &file.source.path,
                header_line: b.header_line,
                header_end_line: b.header_end_line,
                name: &sig.name,
                arity: sig.arity,
            })
        })
        .collect()
}

/// Rules that depend on nothing outside the file.
fn detect_local(file: &FileModel, thresholds: &Thresholds) -> Vec<SmellFinding> {
    let path = file.source.path.as_str();
    let units = file.units();
    let owners = innermost_blocks(file.lines.len(), &file.blocks);
    let mut findings = Vec::new();

    for block in walk_blocks(&file.blocks) {
        findings.extend(detect_dead_code(path, block, &file.lines, &owners, &units));
        findings.extend(detect_multiple_returns(path, block, &file.lines));
        findings.extend(detect_long_block(
            path,
            block,
            thresholds,
            units[block.header_index].clone(),
        ));
        findings.extend(detect_long_parameter_list(
            path,
            block,
            thresholds.max_parameters,
        ));
    }
    for statement in join_logical_lines(&file.lines) {
        let unit = units[statement.lines.start].clone();
        findings.extend(detect_long_statement(
            path,
            &statement,
            thresholds.long_statement_words,
            unit,
        ));
    }
    findings
}

/// Applies all eight rules to the corpus. Output is sorted by
/// (path, start line, kind) and does not depend on thread scheduling.
pub fn run_all_detectors(files: &[FileModel], config: &ScanConfig) -> Vec<SmellFinding> {
    let thresholds = &config.thresholds;
    let mut findings: Vec<SmellFinding> = match config.duplicate_scope {
        DuplicateScope::PerFile => files
            .par_iter()
            .flat_map_iter(|file| {
                let mut out = detect_local(file, thresholds);
                out.extend(detect_repetitive_code(
                    &[file],
                    thresholds.duplicate_window_lines,
                ));
                out.extend(detect_same_function_names(&signatures_of(file)));
                out
            })
            .collect(),
        DuplicateScope::CorpusWide => {
            let mut out: Vec<SmellFinding> = files
                .par_iter()
                .flat_map_iter(|file| detect_local(file, thresholds))
                .collect();
            let mut ordered: Vec<&FileModel> = files.iter().collect();
            ordered.sort_by(|a, b| a.source.path.cmp(&b.source.path));
            out.extend(detect_repetitive_code(
                &ordered,
                thresholds.duplicate_window_lines,
            ));
            let signatures: Vec<_> = ordered.iter().flat_map(|f| signatures_of(f)).collect();
            out.extend(detect_same_function_names(&signatures));
            out
        }
    };
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{sanitize, strip_comments_and_blanks};
    use crate::line_model::extract_blocks;

    fn model(path: &str, src: &str) -> FileModel {
        let mut source = sanitize(path, src.as_bytes());
        let lines = strip_comments_and_blanks(&mut source);
        let blocks = extract_blocks(&lines);
        FileModel {
            source,
            lines,
            blocks,
        }
    }

    fn scan(src: &str) -> Vec<SmellFinding> {
        run_all_detectors(&[model("t.py", src)], &ScanConfig::new("."))
    }

    fn of_kind(findings: &[SmellFinding], kind: SmellKind) -> Vec<(usize, usize)> {
        findings
            .iter()
            .filter(|f| f.kind == kind)
            .map(|f| (f.start_line, f.end_line))
            .collect()
    }

    #[test]
    fn repeated_window_flags_second_copy() {
        let mut lines: Vec<String> = (1..=12).map(|i| format!("v{i} = {i}")).collect();
        for i in 0..3 {
            lines[9 + i] = lines[i].clone();
        }
        let f = model("r.py", &lines.join("\n"));
        let found = detect_repetitive_code(&[&f], 3);
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].start_line, found[0].end_line), (10, 12));
    }

    #[test]
    fn repetitive_edge_cases() {
        let distinct = model("d.py", "a = 1\nb = 2\nc = 3\nd = 4\n");
        assert!(detect_repetitive_code(&[&distinct], 3).is_empty());
        let short = model("s.py", "a = 1\na = 1\n");
        assert!(detect_repetitive_code(&[&short], 3).is_empty());
        let six = model("six.py", &"x = 1\n".repeat(6));
        let found = detect_repetitive_code(&[&six], 3);
        assert_eq!(found.len(), 3);
        assert_eq!(
            found.iter().map(|f| f.start_line).collect::<Vec<_>>(),
            vec![2, 3, 4]
        );
    }

    #[test]
    fn repetitive_ignores_indentation() {
        let f = model("i.py", "a = 1\nb = 2\nif x:\n    a = 1\n    b = 2\n");
        assert_eq!(
            of_kind(&detect_repetitive_code(&[&f], 2), SmellKind::RepetitiveCode),
            vec![(4, 5)]
        );
    }

    #[test]
    fn dead_code_after_return() {
        let found = scan("def f(x):\n    return x\n    y = 1\n    z = 2\n");
        assert_eq!(of_kind(&found, SmellKind::DeadCode), vec![(3, 4)]);
    }

    #[test]
    fn return_last_is_not_dead() {
        let found = scan("def f(x):\n    y = x\n    return y\n");
        assert!(of_kind(&found, SmellKind::DeadCode).is_empty());
    }

    #[test]
    fn dedent_after_return_is_not_dead() {
        let found = scan("def f(x):\n    if x:\n        return 1\n    y = 2\n    return y\n");
        assert!(of_kind(&found, SmellKind::DeadCode).is_empty());
    }

    #[test]
    fn dead_code_inside_try_body() {
        let found = scan(
            "def f():\n    try:\n        return 1\n        x = 2\n    except E:\n        pass\n",
        );
        assert_eq!(of_kind(&found, SmellKind::DeadCode), vec![(4, 4)]);
    }

    #[test]
    fn dead_scan_stops_at_nested_body() {
        let found = scan("def f():\n    return 1\n    if a:\n        b = 2\n    c = 3\n");
        // Same-indent scan: line 3 only; line 4 is deeper, which ends the run.
        assert_eq!(of_kind(&found, SmellKind::DeadCode), vec![(3, 3)]);
    }

    #[test]
    fn multiple_returns() {
        let found = scan("def f(x):\n    if x:\n        return 1\n    else:\n        return 2\n");
        assert_eq!(of_kind(&found, SmellKind::MultipleReturns), vec![(1, 5)]);
        let found = scan("def f(x):\n    return 1\n");
        assert!(of_kind(&found, SmellKind::MultipleReturns).is_empty());
    }

    #[test]
    fn nested_function_returns_are_separate() {
        let src = "def outer():\n    def inner(x):\n        if x:\n            return 1\n        return 2\n    return inner\n";
        let found = scan(src);
        let multi: Vec<_> = found
            .iter()
            .filter(|f| f.kind == SmellKind::MultipleReturns)
            .collect();
        assert_eq!(multi.len(), 1);
        assert_eq!(multi[0].unit.as_deref(), Some("inner"));
        assert_eq!((multi[0].start_line, multi[0].end_line), (2, 5));
    }

    #[test]
    fn long_statement_boundary() {
        let words = |n: usize| {
            (0..n)
                .map(|i| format!("w{i}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        assert_eq!(
            of_kind(&scan(&words(21)), SmellKind::LongStatement),
            vec![(1, 1)]
        );
        assert!(of_kind(&scan(&words(20)), SmellKind::LongStatement).is_empty());
    }

    #[test]
    fn long_statement_joins_continuations() {
        let head = (0..12)
            .map(|i| format!("a{i},"))
            .collect::<Vec<_>>()
            .join(" ");
        let tail = (0..9)
            .map(|i| format!("b{i},"))
            .collect::<Vec<_>>()
            .join(" ");
        let src = format!("x = f({head}\n      {tail})\n");
        // 2 + 12 on the first line, 9 on the second: 23 words.
        assert_eq!(of_kind(&scan(&src), SmellKind::LongStatement), vec![(1, 2)]);
    }

    #[test]
    fn same_function_names() {
        let found = scan("def foo(a, b):\n    pass\ndef foo(a, b):\n    pass\n");
        assert_eq!(of_kind(&found, SmellKind::SameFunctionName), vec![(3, 3)]);
        let found = scan("def foo(a):\n    pass\ndef foo(a, b):\n    pass\n");
        assert!(of_kind(&found, SmellKind::SameFunctionName).is_empty());
        let found = scan("def foo(a):\n    pass\ndef bar(a):\n    pass\n");
        assert!(of_kind(&found, SmellKind::SameFunctionName).is_empty());
    }

    #[test]
    fn same_names_across_classes_compare_equal() {
        let src = "class A:\n    def run(self):\n        pass\nclass B:\n    def run(self):\n        pass\n";
        assert_eq!(
            of_kind(&scan(src), SmellKind::SameFunctionName),
            vec![(5, 5)]
        );
    }

    #[test]
    fn malformed_signatures_are_not_grouped() {
        assert!(of_kind(
            &scan("def f:\n    pass\ndef f:\n    pass\n"),
            SmellKind::SameFunctionName
        )
        .is_empty());
    }

    #[test]
    fn same_names_corpus_scope() {
        let files = [
            model("a.py", "def foo(x):\n    pass\n"),
            model("b.py", "def foo(y):\n    pass\n"),
        ];
        let mut config = ScanConfig::new(".");
        assert!(run_all_detectors(&files, &config).is_empty());
        config.duplicate_scope = DuplicateScope::CorpusWide;
        let found = run_all_detectors(&files, &config);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].path, "b.py");
        assert!(found[0].message.contains("a.py:1"));
    }

    fn body(indent: &str, n: usize) -> String {
        (0..n).map(|i| format!("{indent}v{i} = {i}\n")).collect()
    }

    #[test]
    fn long_class_and_method_boundaries() {
        let class = |n| format!("class A:\n{}", body("    ", n));
        assert_eq!(
            of_kind(&scan(&class(61)), SmellKind::LongClassOrMethod).len(),
            1
        );
        assert!(of_kind(&scan(&class(60)), SmellKind::LongClassOrMethod).is_empty());
        let method = |n| format!("def m():\n{}", body("    ", n));
        assert!(of_kind(&scan(&method(40)), SmellKind::LongClassOrMethod).is_empty());
        let found = scan(&method(41));
        let long: Vec<_> = found
            .iter()
            .filter(|f| f.kind == SmellKind::LongClassOrMethod)
            .collect();
        assert_eq!(long.len(), 1);
        assert!(long[0].message.starts_with("Long Method found"));
    }

    #[test]
    fn nested_long_blocks_both_reported() {
        // Loop body: 1 header + 11 conditional lines + 13 others = 25 lines.
        let src = format!(
            "for i in x:\n    if i:\n{}{}",
            body("        ", 11),
            body("    ", 13)
        );
        let found = scan(&src);
        assert_eq!(
            of_kind(&found, SmellKind::LongConditionalOrLoop),
            vec![(1, 26), (2, 13)]
        );
    }

    #[test]
    fn long_parameter_list_boundary() {
        assert_eq!(
            of_kind(
                &scan("def f(a, b, c, d, e, g):\n    pass\n"),
                SmellKind::LongParameterList
            ),
            vec![(1, 1)]
        );
        assert!(of_kind(
            &scan("def f(a, b, c, d, e):\n    pass\n"),
            SmellKind::LongParameterList
        )
        .is_empty());
        assert!(of_kind(&scan("def f():\n    pass\n"), SmellKind::LongParameterList).is_empty());
    }

    #[test]
    fn empty_corpus() {
        assert!(run_all_detectors(&[], &ScanConfig::new(".")).is_empty());
    }

    #[test]
    fn kind_order_matches_reporting_order() {
        let mut sorted = SmellKind::ALL;
        sorted.sort();
        assert_eq!(sorted, SmellKind::ALL);
    }
}
