#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn write_file(root: &Path, rel: &str, contents: impl AsRef<[u8]>) {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).unwrap();
    }
    std::fs::write(path, contents).unwrap();
}

/// Random but well-indented Python-like source. A small vocabulary makes
/// repeated lines and repeated windows common.
pub fn random_program(rng: &mut ChaCha8Rng, max_lines: usize) -> String {
    let mut out = Vec::new();
    while out.len() < max_lines {
        statement(rng, 0, 0, &mut out, max_lines);
    }
    out.truncate(max_lines);
    let mut text = out.join("\n");
    text.push('\n');
    text
}

fn statement(rng: &mut ChaCha8Rng, indent: usize, depth: usize, out: &mut Vec<String>, max: usize) {
    if out.len() >= max {
        return;
    }
    let pad = " ".repeat(indent);
    let roll = rng.gen_range(0..100);
    let var = rng.gen_range(0..4);
    let header = match roll {
        0..=29 => {
            out.push(format!("{pad}x{var} = y{}", rng.gen_range(0..3)));
            None
        }
        30..=41 => {
            out.push(format!("{pad}call(x{var})"));
            None
        }
        42..=49 => {
            out.push(format!("{pad}return x{var}"));
            None
        }
        50..=53 => {
            out.push(String::new());
            None
        }
        54..=56 => {
            out.push(format!("{pad}# note {var}"));
            None
        }
        57..=66 if depth < 4 => {
            let params: Vec<String> = (0..rng.gen_range(0..8)).map(|i| format!("p{i}")).collect();
            Some(format!("{pad}def f{var}({}):", params.join(", ")))
        }
        67..=76 if depth < 4 => Some(format!("{pad}if x{var}:")),
        77..=80 if depth < 4 => Some(format!("{pad}else:")),
        81..=87 if depth < 4 => Some(format!("{pad}for i in x{var}:")),
        88..=90 if depth < 4 => Some(format!("{pad}while x{var}:")),
        91..=94 if depth < 4 => Some(format!("{pad}class C{var}:")),
        _ => {
            out.push(format!(
                "{pad}z = {}",
                (0..rng.gen_range(1..30))
                    .map(|i| format!("t{i}"))
                    .collect::<Vec<_>>()
                    .join(" + ")
            ));
            None
        }
    };
    if let Some(header) = header {
        out.push(header);
        let body = rng.gen_range(1..8);
        for _ in 0..body {
            statement(rng, indent + 4, depth + 1, out, max);
        }
    }
}
