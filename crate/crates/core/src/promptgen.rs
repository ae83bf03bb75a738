//! Prompt assembly for the 38-case experiment matrix.
//!
//! A prompt is a sequence of text blocks separated by exactly one blank line:
//! base statement, optional grammar, optional theory, zero to three worked
//! examples, optional emotional directive, and the final query.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const GRAMMAR_HEADER: &str = "Here is Symboleo's syntax in Xtext format:";

/// Smallest chunk size `split_for_limit` accepts; smaller limits are raised to it.
pub const MIN_CHUNK_CHARS: usize = 1024;

const ORDINALS: [&str; 3] = ["First", "Second", "Third"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    A,
    B,
    C,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::A, Scenario::B, Scenario::C];

    pub fn letter(self) -> char {
        match self {
            Scenario::A => 'A',
            Scenario::B => 'B',
            Scenario::C => 'C',
        }
    }

    pub fn from_letter(c: char) -> Option<Scenario> {
        match c.to_ascii_uppercase() {
            'A' => Some(Scenario::A),
            'B' => Some(Scenario::B),
            'C' => Some(Scenario::C),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptConfig {
    pub include_grammar: bool,
    pub include_theory: bool,
    pub include_emotional: bool,
    /// Worked examples in presentation order, no repeats.
    pub examples: Vec<Scenario>,
    pub case_id: Option<u8>,
}

impl PromptConfig {
    /// Example sequence as printed in report tables: `No.` when empty.
    pub fn scenario_label(&self) -> String {
        if self.examples.is_empty() {
            "No.".to_string()
        } else {
            self.examples.iter().map(|s| s.letter()).collect()
        }
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.examples.len() > 3 {
            return Err(PromptError::InvalidConfig(format!("{} examples, at most 3 allowed", self.examples.len())));
        }
        for (i, s) in self.examples.iter().enumerate() {
            if self.examples[..i].contains(s) {
                return Err(PromptError::InvalidConfig(format!("scenario {s} repeated")));
            }
        }
        if let Some(id) = self.case_id {
            match paper_matrix().into_iter().find(|c| c.case_id == Some(id)) {
                Some(entry) if entry == *self => {}
                Some(_) => return Err(PromptError::InvalidConfig(format!("config does not match matrix case {id}"))),
                None => return Err(PromptError::InvalidConfig(format!("case id {id} outside 1..=38"))),
            }
        }
        Ok(())
    }
}

/// Example sequences in table order within each grammar block.
pub const EXAMPLE_ORDER: [&str; 9] = ["", "A", "AB", "ABC", "AC", "BC", "BA", "CA", "CB"];

fn examples(seq: &str) -> Vec<Scenario> {
    seq.chars().filter_map(Scenario::from_letter).collect()
}

/// The 38 experiment configurations, ordered by case id.
///
/// Cases 1–2 omit the grammar. Cases 3–38 are four blocks of nine, one per
/// (theory, emotional) combination in the order (off, off), (off, on),
/// (on, off), (on, on).
pub fn paper_matrix() -> Vec<PromptConfig> {
    let mut out = vec![
        PromptConfig { case_id: Some(1), ..Default::default() },
        PromptConfig { examples: examples("ABC"), case_id: Some(2), ..Default::default() },
    ];
    let mut id = 3;
    for (theory, emotional) in [(false, false), (false, true), (true, false), (true, true)] {
        for seq in EXAMPLE_ORDER {
            out.push(PromptConfig {
                include_grammar: true,
                include_theory: theory,
                include_emotional: emotional,
                examples: examples(seq),
                case_id: Some(id),
            });
            id += 1;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioText {
    pub contract: String,
    pub spec: String,
}

/// Where the emotional directive goes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmotionalPlacement {
    /// After the examples, directly before the final query.
    #[default]
    BeforeQuery,
    /// Right after the base statement.
    AfterBase,
}

/// Text blocks a prompt is built from. Every block is stored normalised:
/// LF line endings, no trailing whitespace, exactly one final newline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptAssets {
    pub base: String,
    pub grammar: String,
    pub theory: String,
    pub emotional: String,
    pub scenarios: BTreeMap<Scenario, ScenarioText>,
    pub query: String,
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("missing asset {}", .0.display())]
    MissingAsset(PathBuf),
    #[error("missing scenario asset {0}")]
    MissingScenarioAsset(Scenario),
    #[error("reading {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid prompt config: {0}")]
    InvalidConfig(String),
}

pub fn normalize(text: &str) -> String {
    let mut s = text.replace("\r\n", "\n");
    s.truncate(s.trim_end().len());
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, PromptError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(normalize(&s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(PromptError::MissingAsset(path.to_path_buf())),
        Err(source) => Err(PromptError::Io { path: path.to_path_buf(), source }),
    }
}

impl PromptAssets {
    /// Loads `base.txt`, `grammar.txt`, `theory.txt`, `emotional.txt`,
    /// `query.txt` and `scenarios/{A,B,C}/{contract.txt,spec.symboleo}`.
    ///
    /// A scenario with either file missing is left out; assembling a config
    /// that uses it fails with [`PromptError::MissingScenarioAsset`].
    pub fn load(dir: &Path) -> Result<PromptAssets, PromptError> {
        let mut scenarios = BTreeMap::new();
        for s in Scenario::ALL {
            let sub = dir.join("scenarios").join(s.to_string());
            let contract = read(&sub.join("contract.txt"));
            let spec = read(&sub.join("spec.symboleo"));
            match (contract, spec) {
                (Ok(contract), Ok(spec)) => {
                    scenarios.insert(s, ScenarioText { contract, spec });
                }
                (Err(PromptError::Io { path, source }), _) | (_, Err(PromptError::Io { path, source })) => {
                    return Err(PromptError::Io { path, source })
                }
                _ => {}
            }
        }
        Ok(PromptAssets {
            base: read(&dir.join("base.txt"))?,
            grammar: read(&dir.join("grammar.txt"))?,
            theory: read(&dir.join("theory.txt"))?,
            emotional: read(&dir.join("emotional.txt"))?,
            scenarios,
            query: read(&dir.join("query.txt"))?,
        })
    }

    /// Replaces the bundled grammar with another file, e.g. the full Xtext grammar.
    pub fn with_grammar_file(mut self, path: &Path) -> Result<PromptAssets, PromptError> {
        self.grammar = read(path)?;
        Ok(self)
    }
}

fn example_block(position: usize, text: &ScenarioText) -> String {
    let ordinal = ORDINALS[position];
    let lead = if position == 0 { format!("Here is the {ordinal}") } else { ordinal.to_string() };
    format!(
        "{lead} example of a legal contract in natural language, followed by its Symboleo specification:\n{}The corresponding Symboleo specification is:\n{}",
        text.contract, text.spec
    )
}

pub fn assemble(config: &PromptConfig, assets: &PromptAssets) -> Result<String, PromptError> {
    assemble_with(config, assets, EmotionalPlacement::default())
}

pub fn assemble_with(
    config: &PromptConfig,
    assets: &PromptAssets,
    placement: EmotionalPlacement,
) -> Result<String, PromptError> {
    config.validate()?;
    let mut blocks: Vec<String> = vec![assets.base.clone()];
    let emotional = config.include_emotional.then(|| assets.emotional.clone());
    if placement == EmotionalPlacement::AfterBase {
        blocks.extend(emotional.clone());
    }
    if config.include_grammar {
        blocks.push(format!("{GRAMMAR_HEADER}\n{}", assets.grammar));
    }
    if config.include_theory {
        blocks.push(assets.theory.clone());
    }
    for (i, s) in config.examples.iter().enumerate() {
        let text = assets.scenarios.get(s).ok_or(PromptError::MissingScenarioAsset(*s))?;
        blocks.push(example_block(i, text));
    }
    if placement == EmotionalPlacement::BeforeQuery {
        blocks.extend(emotional);
    }
    blocks.push(assets.query.clone());
    Ok(blocks.join("\n"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub text: String,
    /// A single block longer than the limit.
    pub oversize: bool,
}

/// Splits a prompt into chunks of at most `max_chars` characters, cutting only
/// after blank lines. Concatenating the chunks gives back the prompt.
pub fn split_for_limit(prompt: &str, max_chars: usize) -> Vec<Chunk> {
    let max = max_chars.max(MIN_CHUNK_CHARS);
    let mut segments = Vec::new();
    let mut start = 0;
    while let Some(i) = prompt[start..].find("\n\n") {
        let end = start + i + 2;
        segments.push(&prompt[start..end]);
        start = end;
    }
    if start < prompt.len() || segments.is_empty() {
        segments.push(&prompt[start..]);
    }

    let mut chunks = Vec::new();
    let mut current = String::new();
    let mut current_len = 0;
    for seg in segments {
        let len = seg.chars().count();
        if current_len + len > max && !current.is_empty() {
            chunks.push(Chunk { text: std::mem::take(&mut current), oversize: false });
            current_len = 0;
        }
        current.push_str(seg);
        current_len += len;
        if current_len > max {
            chunks.push(Chunk { text: std::mem::take(&mut current), oversize: true });
            current_len = 0;
        }
    }
    if !current.is_empty() || chunks.is_empty() {
        chunks.push(Chunk { text: current, oversize: false });
    }
    chunks
}
