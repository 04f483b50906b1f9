//! Line classification, indentation-delimited blocks and function
//! signatures.
//!
//! Everything here works on the effective lines of a single file (blank
//! lines, comments and documentation strings already removed). A block's
//! body is the maximal run of following lines indented strictly deeper than
//! its header; continuation lines (inside brackets, strings or after a
//! trailing backslash) belong to whatever statement they continue and never
//! close a block.

use std::ops::Range;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    FunctionDef,
    ClassDef,
    ConditionalHeader,
    LoopHeader,
    ReturnStmt,
    Other,
}

/// One effective physical line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineRecord {
    /// 1-based line number in the original file.
    pub physical_line: usize,
    /// Line content with any trailing comment removed.
    pub text: String,
    pub lead_spaces: usize,
    pub kind: LineKind,
    pub word_count: usize,
    /// True when this line continues the statement started on an earlier
    /// line (open bracket, open string, or trailing backslash).
    pub continuation: bool,
}

impl LineRecord {
    pub fn new(physical_line: usize, text: impl Into<String>, continuation: bool) -> Self {
        let text = text.into();
        let kind = if continuation {
            LineKind::Other
        } else {
            classify_line(&text)
        };
        Self {
            physical_line,
            lead_spaces: get_lead_spaces(&text),
            word_count: text.split_whitespace().count(),
            kind,
            text,
            continuation,
        }
    }
}

/// Number of leading whitespace characters. Tabs weigh the same as spaces.
pub fn get_lead_spaces(line: &str) -> usize {
    line.chars().take_while(|c| c.is_whitespace()).count()
}

/// Leading identifier of `s` (letters, digits, underscore) and the rest.
fn leading_word(s: &str) -> (&str, &str) {
    let end = s
        .char_indices()
        .find(|&(_, c)| !(c.is_alphanumeric() || c == '_'))
        .map_or(s.len(), |(i, _)| i);
    s.split_at(end)
}

/// Classifies a statement-start line by its first keyword.
pub fn classify_line(text: &str) -> LineKind {
    let (mut word, rest) = leading_word(text.trim_start());
    if word == "async" {
        word = leading_word(rest.trim_start()).0;
    }
    match word {
        "def" => LineKind::FunctionDef,
        "class" => LineKind::ClassDef,
        "if" | "elif" | "else" => LineKind::ConditionalHeader,
        "for" | "while" => LineKind::LoopHeader,
        "return" => LineKind::ReturnStmt,
        _ => LineKind::Other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BlockKind {
    Class,
    Method,
    Loop,
    Conditional,
}

impl BlockKind {
    fn from_line(kind: LineKind) -> Option<Self> {
        match kind {
            LineKind::FunctionDef => Some(Self::Method),
            LineKind::ClassDef => Some(Self::Class),
            LineKind::LoopHeader => Some(Self::Loop),
            LineKind::ConditionalHeader => Some(Self::Conditional),
            LineKind::ReturnStmt | LineKind::Other => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Class => "Class",
            Self::Method => "Method",
            Self::Loop => "Loop",
            Self::Conditional => "Conditional",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSignature {
    pub name: String,
    pub parameter_names: Vec<String>,
    pub arity: usize,
    /// False when the header had no parameter list; such signatures are
    /// left out of same-name grouping.
    pub well_formed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    /// Index of the header in the effective-line slice.
    pub header_index: usize,
    pub header_line: usize,
    /// Last physical line of the header (differs for multi-line signatures).
    pub header_end_line: usize,
    pub header_lead_spaces: usize,
    /// Effective-line indices of the body.
    pub body: Range<usize>,
    /// Physical span of the body; both equal `header_end_line` when empty.
    pub body_start: usize,
    pub body_end: usize,
    pub body_effective_lines: usize,
    pub children: Vec<Block>,
    /// Function or class name.
    pub name: Option<String>,
    pub signature: Option<FunctionSignature>,
}

impl Block {
    /// Effective-line indices covered by header and body.
    pub fn span(&self) -> Range<usize> {
        self.header_index..self.body.end.max(self.header_index + 1)
    }

    /// Pre-order traversal of this block and all descendants.
    pub fn walk(&self) -> BlockIter<'_> {
        BlockIter { stack: vec![self] }
    }
}

pub struct BlockIter<'a> {
    stack: Vec<&'a Block>,
}

impl<'a> Iterator for BlockIter<'a> {
    type Item = &'a Block;

    fn next(&mut self) -> Option<Self::Item> {
        let block = self.stack.pop()?;
        self.stack.extend(block.children.iter().rev());
        Some(block)
    }
}

/// Pre-order traversal over a forest.
pub fn walk_blocks(forest: &[Block]) -> impl Iterator<Item = &Block> {
    forest.iter().flat_map(Block::walk)
}

/// Builds the block forest for one file's effective lines.
pub fn extract_blocks(lines: &[LineRecord]) -> Vec<Block> {
    build_forest(lines, 0..lines.len())
}

fn build_forest(lines: &[LineRecord], range: Range<usize>) -> Vec<Block> {
    let mut out = Vec::new();
    let mut k = range.start;
    while k < range.end {
        let header = &lines[k];
        let kind = match BlockKind::from_line(header.kind) {
            Some(kind) if !header.continuation => kind,
            _ => {
                k += 1;
                continue;
            }
        };

        let mut body_start = k + 1;
        while body_start < range.end && lines[body_start].continuation {
            body_start += 1;
        }
        let mut body_end = body_start;
        while body_end < range.end
            && (lines[body_end].continuation || lines[body_end].lead_spaces > header.lead_spaces)
        {
            body_end += 1;
        }

        let header_end_line = lines[body_start - 1].physical_line;
        let (first, last) = if body_end > body_start {
            (
                lines[body_start].physical_line,
                lines[body_end - 1].physical_line,
            )
        } else {
            (header_end_line, header_end_line)
        };
        let signature = (kind == BlockKind::Method).then(|| get_function_signature(lines, k));
        let name = match kind {
            BlockKind::Method => signature.as_ref().map(|s| s.name.clone()),
            BlockKind::Class => Some(class_name(&header.text)),
            _ => None,
        };

        out.push(Block {
            kind,
            header_index: k,
            header_line: header.physical_line,
            header_end_line,
            header_lead_spaces: header.lead_spaces,
            body: body_start..body_end,
            body_start: first,
            body_end: last,
            body_effective_lines: body_end - body_start,
            children: build_forest(lines, body_start..body_end),
            name,
            signature,
        });
        k = body_end;
    }
    out
}

fn class_name(header: &str) -> String {
    let rest = header.trim_start().strip_prefix("class").unwrap_or(header);
    leading_word(rest.trim_start()).0.to_string()
}

/// Joins a function header with its continuation lines and parses it.
pub fn get_function_signature(lines: &[LineRecord], header_index: usize) -> FunctionSignature {
    let mut text = lines[header_index].text.trim().to_string();
    for line in lines[header_index + 1..]
        .iter()
        .take_while(|l| l.continuation)
    {
        text.push(' ');
        text.push_str(line.text.trim());
    }
    parse_signature(&text)
}

/// Parses a (joined) `def` header.
///
/// The name is the text between `def` and the first `(`. Parameters are the
/// top-level comma-separated items of the outermost parentheses, each cut at
/// its first `=` or `:`, with leading `*` removed; items that are not
/// identifiers afterwards (a bare `*` or `/`) are dropped.
pub fn parse_signature(header: &str) -> FunctionSignature {
    let mut rest = header.trim_start();
    if let ("async", tail) = leading_word(rest) {
        rest = tail.trim_start();
    }
    let after_def = rest.strip_prefix("def").unwrap_or(rest);

    let Some(open) = after_def.find('(') else {
        let name = after_def
            .split_whitespace()
            .next()
            .unwrap_or("")
            .trim_end_matches(':')
            .to_string();
        return FunctionSignature {
            name,
            parameter_names: Vec::new(),
            arity: 0,
            well_formed: false,
        };
    };

    let name = after_def[..open].trim().to_string();
    let inner = matching_paren_contents(&after_def[open + 1..]);
    let parameter_names: Vec<String> = split_top_level(inner)
        .into_iter()
        .filter_map(|item| {
            let cut = item.find(['=', ':']).unwrap_or(item.len());
            let ident = item[..cut].trim().trim_start_matches('*').trim();
            is_identifier(ident).then(|| ident.to_string())
        })
        .collect();
    FunctionSignature {
        name,
        arity: parameter_names.len(),
        parameter_names,
        well_formed: true,
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => chars.all(|c| c.is_alphanumeric() || c == '_'),
        _ => false,
    }
}

/// Text up to the `)` that closes an already-consumed `(`. Returns the rest
/// of the input when the parenthesis never closes.
fn matching_paren_contents(s: &str) -> &str {
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '\'' | '"' => quote = Some(c),
            '(' | '[' | '{' => depth += 1,
            ')' if depth == 0 => return &s[..i],
            ')' | ']' | '}' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    s
}

/// Splits on commas that are outside brackets and string literals.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '\'' | '"' => quote = Some(c),
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// A statement: one head line plus its continuation lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalLine {
    /// Effective-line indices.
    pub lines: Range<usize>,
    pub first_line: usize,
    pub last_line: usize,
    pub text: String,
    pub word_count: usize,
}

pub fn join_logical_lines(lines: &[LineRecord]) -> Vec<LogicalLine> {
    let mut out: Vec<LogicalLine> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        match out.last_mut() {
            Some(current) if line.continuation => {
                current.lines.end = i + 1;
                current.last_line = line.physical_line;
                current.text.push(' ');
                current.text.push_str(line.text.trim());
                current.word_count += line.word_count;
            }
            _ => out.push(LogicalLine {
                lines: i..i + 1,
                first_line: line.physical_line,
                last_line: line.physical_line,
                text: line.text.trim().to_string(),
                word_count: line.word_count,
            }),
        }
    }
    out
}

/// For each effective line, the name of the innermost function or class
/// whose header or body contains it.
pub fn enclosing_units(line_count: usize, forest: &[Block]) -> Vec<Option<String>> {
    let mut units = vec![None; line_count];
    // Pre-order visits outer units first, so inner names overwrite.
    for block in walk_blocks(forest) {
        if let (BlockKind::Method | BlockKind::Class, Some(name)) = (block.kind, &block.name) {
            for slot in &mut units[block.span()] {
                *slot = Some(name.clone());
            }
        }
    }
    units
}
