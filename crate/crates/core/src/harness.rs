//! LLM round trip: send an assembled prompt to a chat-completion endpoint (or
//! a replay store), pull the Symboleo code out of the answer, and run it
//! through the parser, linter and scorer.

use crate::batch;
use crate::diagnostic::Diagnostic;
use crate::linter::lint;
use crate::parser::parse;
use crate::promptgen::{assemble, split_for_limit, PromptAssets, PromptConfig, PromptError};
use crate::scorer::{merge, score, Annotation, ScoreReport};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    #[default]
    Replay,
    Record,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "live" => Ok(Mode::Live),
            "replay" => Ok(Mode::Replay),
            "record" => Ok(Mode::Record),
            _ => Err(format!("unknown mode `{s}` (expected live, replay or record)")),
        }
    }
}

/// Where prompts go. The API key itself is never stored: `api_key_env` names
/// the environment variable that holds it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Identity used for fixture and record paths, e.g. `gpt-4o`.
    pub name: String,
    pub base_url: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_seconds: u64,
    pub mode: Mode,
    pub fixture_dir: Option<PathBuf>,
}

impl EndpointConfig {
    pub fn replay(name: &str, fixture_dir: impl Into<PathBuf>) -> Self {
        EndpointConfig {
            name: name.to_string(),
            base_url: String::new(),
            model: name.to_string(),
            api_key_env: String::new(),
            timeout_seconds: 120,
            mode: Mode::Replay,
            fixture_dir: Some(fixture_dir.into()),
        }
    }

    pub fn validate(&self) -> Result<(), SendError> {
        if self.timeout_seconds == 0 {
            return Err(SendError::Config("timeout must be positive".into()));
        }
        if matches!(self.mode, Mode::Replay | Mode::Record) && self.fixture_dir.is_none() {
            return Err(SendError::Config(format!("{:?} mode needs a fixture directory", self.mode).to_lowercase()));
        }
        if matches!(self.mode, Mode::Live | Mode::Record) && self.base_url.is_empty() {
            return Err(SendError::Config("live requests need a base URL".into()));
        }
        Ok(())
    }

    /// Reads the key from the environment. Fails before anything touches the
    /// network.
    pub fn api_key(&self) -> Result<String, SendError> {
        if self.api_key_env.is_empty() {
            return Err(SendError::AuthFailure("no API key variable configured".into()));
        }
        match std::env::var(&self.api_key_env) {
            Ok(k) if !k.trim().is_empty() => Ok(k),
            _ => Err(SendError::AuthFailure(format!("environment variable {} is not set", self.api_key_env))),
        }
    }

    pub fn fixture_path(&self, case_id: u8) -> Option<PathBuf> {
        self.fixture_dir.as_ref().map(|d| fixture_path(d, &self.name, case_id))
    }
}

/// `<dir>/<endpoint>/case-NN.txt`
pub fn fixture_path(dir: &Path, endpoint: &str, case_id: u8) -> PathBuf {
    dir.join(endpoint).join(format!("case-{case_id:02}.txt"))
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SendError {
    #[error("request timed out")]
    Timeout,
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("authentication failure: {0}")]
    AuthFailure(String),
    #[error("no stored response at {0}")]
    MissingFixture(PathBuf),
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn user(content: &str) -> Self {
        Message { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: &str) -> Self {
        Message { role: "assistant".into(), content: content.into() }
    }
}

/// One chat-completion request: the whole conversation so far in, the next
/// assistant message out.
pub trait Transport: Sync {
    fn complete(&self, endpoint: &EndpointConfig, api_key: &str, messages: &[Message]) -> Result<String, SendError>;
}

/// OpenAI-style `POST {base_url}/chat/completions` with bearer auth.
#[derive(Debug, Default)]
pub struct HttpTransport;

impl Transport for HttpTransport {
    fn complete(&self, endpoint: &EndpointConfig, api_key: &str, messages: &[Message]) -> Result<String, SendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(endpoint.timeout_seconds))
            .build()
            .map_err(|e| SendError::TransportFailure(e.to_string()))?;
        let url = format!("{}/chat/completions", endpoint.base_url.trim_end_matches('/'));
        let body = serde_json::json!({ "model": endpoint.model, "messages": messages });
        let resp = client.post(url).bearer_auth(api_key).json(&body).send().map_err(|e| {
            if e.is_timeout() {
                SendError::Timeout
            } else {
                SendError::TransportFailure(e.to_string())
            }
        })?;
        let status = resp.status();
        if status == reqwest::StatusCode::UNAUTHORIZED || status == reqwest::StatusCode::FORBIDDEN {
            return Err(SendError::AuthFailure(format!("endpoint answered {status}")));
        }
        if !status.is_success() {
            return Err(SendError::TransportFailure(format!("endpoint answered {status}")));
        }
        let json: serde_json::Value = resp.json().map_err(|e| SendError::TransportFailure(e.to_string()))?;
        json["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| SendError::TransportFailure("response has no message content".into()))
    }
}

/// Stored responses. Reads may run concurrently; writes are serialised.
#[derive(Debug, Default)]
pub struct FixtureStore {
    write_lock: Mutex<()>,
}

impl FixtureStore {
    pub fn read(&self, path: &Path) -> Result<String, SendError> {
        fs::read_to_string(path).map_err(|_| SendError::MissingFixture(path.to_path_buf()))
    }

    pub fn write(&self, path: &Path, response: &str) -> Result<(), SendError> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let io = |e: std::io::Error| SendError::TransportFailure(format!("writing {}: {e}", path.display()));
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io)?;
        }
        fs::write(path, response).map_err(io)
    }
}

/// Sends one case. Chunks go out as consecutive user turns of a single fresh
/// conversation; the answer to the last turn is the response.
pub fn send(
    case_id: u8,
    chunks: &[String],
    endpoint: &EndpointConfig,
    transport: &dyn Transport,
    store: &FixtureStore,
) -> Result<String, SendError> {
    endpoint.validate()?;
    if endpoint.mode == Mode::Replay {
        let path = endpoint.fixture_path(case_id).expect("validated");
        return store.read(&path);
    }
    let key = endpoint.api_key()?;
    let mut conversation = Vec::new();
    let mut last = String::new();
    for chunk in chunks {
        conversation.push(Message::user(chunk));
        last = transport.complete(endpoint, &key, &conversation)?;
        conversation.push(Message::assistant(&last));
    }
    if endpoint.mode == Mode::Record {
        store.write(&endpoint.fixture_path(case_id).expect("validated"), &last)?;
    }
    Ok(last)
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractError {
    #[error("no Symboleo code found in the response")]
    NoCodeFound,
}

fn fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn starts_spec(block: &str) -> bool {
    block.lines().find(|l| !l.trim().is_empty()).is_some_and(|l| {
        let l = l.trim_start();
        l.starts_with("Domain") || l.starts_with("Contract")
    })
}

const SECTION_WORDS: [&str; 10] = [
    "Domain",
    "endDomain",
    "Contract",
    "endContract",
    "Declarations",
    "Preconditions",
    "Postconditions",
    "Obligations",
    "Powers",
    "Constraints",
];

/// Lines that could belong to a Symboleo listing.
fn code_like(line: &str) -> bool {
    let t = line.trim();
    if t.is_empty() {
        return false;
    }
    let first = t.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("");
    let end_marker =
        first.len() > 3 && first.starts_with("end") && first[3..].starts_with(|c: char| c.is_ascii_uppercase());
    SECTION_WORDS.contains(&first)
        || first == "SurvivingObligations"
        || end_marker
        || t.starts_with("//")
        || [";", ",", "(", ")", "->", " with", " and", " or"].iter().any(|end| t.ends_with(end))
}

/// Pulls the Symboleo source out of a model response.
///
/// Fenced blocks win: the first one that opens with `Domain` or `Contract`,
/// else the first non-empty one. Without fences, the longest run of
/// code-like lines that has both a `;` and a section keyword.
pub fn extract_code(raw: &str) -> Result<String, ExtractError> {
    let mut blocks: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for line in raw.lines() {
        if fence(line) {
            match current.take() {
                Some(b) => blocks.push(b),
                None => current = Some(String::new()),
            }
        } else if let Some(b) = current.as_mut() {
            b.push_str(line);
            b.push('\n');
        }
    }
    // An unterminated fence still counts.
    blocks.extend(current);
    blocks.retain(|b| !b.trim().is_empty());
    if let Some(b) = blocks.iter().find(|b| starts_spec(b)).or(blocks.first()) {
        return Ok(b.clone());
    }

    let lines: Vec<&str> = raw.lines().collect();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < lines.len() {
        if !code_like(lines[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < lines.len() && (code_like(lines[i]) || lines[i].trim().is_empty()) {
            i += 1;
        }
        let mut end = i;
        while end > start && lines[end - 1].trim().is_empty() {
            end -= 1;
        }
        let region = &lines[start..end];
        let has_semicolon = region.iter().any(|l| l.contains(';'));
        let has_section = region.iter().any(|l| {
            let w = l.trim().split(|c: char| !c.is_alphanumeric()).next().unwrap_or("");
            SECTION_WORDS.contains(&w) || w == "SurvivingObligations"
        });
        if has_semicolon && has_section && best.is_none_or(|(s, e)| end - start > e - s) {
            best = Some((start, end));
        }
    }
    match best {
        Some((s, e)) => Ok(lines[s..e].iter().map(|l| format!("{l}\n")).collect()),
        None => Err(ExtractError::NoCodeFound),
    }
}

/// Parser outcome as stored on a run record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOutcome {
    /// A tree was produced.
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub case_id: u8,
    pub endpoint: String,
    pub model: String,
    pub mode: Mode,
    pub prompt: String,
    /// Parts the prompt was split into; empty when sent whole.
    pub chunks: Vec<String>,
    pub raw_response: Option<String>,
    pub extracted_source: Option<String>,
    pub parse: Option<ParseOutcome>,
    pub lint_diagnostics: Vec<Diagnostic>,
    pub score: Option<ScoreReport>,
    pub send_error: Option<SendError>,
    pub extract_error: Option<ExtractError>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunRecord {
    pub fn transport_failed(&self) -> bool {
        self.send_error.is_some()
    }

    /// All automated findings: parser diagnostics followed by lint diagnostics.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = self.parse.as_ref().map(|p| p.diagnostics.clone()).unwrap_or_default();
        out.extend(self.lint_diagnostics.iter().cloned());
        out
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub threads: usize,
    /// Split prompts longer than this many characters.
    pub max_chars: Option<usize>,
    /// Manual annotations for this endpoint; cases with annotations get scored.
    pub annotations: Vec<Annotation>,
    /// Parent of the timestamped run directory; nothing is written when unset.
    pub runs_dir: Option<PathBuf>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { threads: 4, max_chars: None, annotations: Vec::new(), runs_dir: None }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Assets(#[from] PromptError),
    #[error("config {index} has no case id")]
    MissingCaseId { index: usize },
    #[error("writing run records: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug)]
pub struct PipelineRun {
    pub records: Vec<RunRecord>,
    pub run_dir: Option<PathBuf>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn run_case(
    config: &PromptConfig,
    prompt: String,
    endpoint: &EndpointConfig,
    transport: &dyn Transport,
    store: &FixtureStore,
    options: &PipelineOptions,
) -> RunRecord {
    let case_id = config.case_id.expect("checked by run_pipeline");
    let started_at = now();
    let chunks: Vec<String> = match options.max_chars {
        Some(max) => split_for_limit(&prompt, max).into_iter().map(|c| c.text).collect(),
        None => vec![prompt.clone()],
    };
    let mut record = RunRecord {
        case_id,
        endpoint: endpoint.name.clone(),
        model: endpoint.model.clone(),
        mode: endpoint.mode,
        chunks: if chunks.len() > 1 { chunks.clone() } else { Vec::new() },
        prompt,
        raw_response: None,
        extracted_source: None,
        parse: None,
        lint_diagnostics: Vec::new(),
        score: None,
        send_error: None,
        extract_error: None,
        started_at,
        finished_at: String::new(),
    };
    match send(case_id, &chunks, endpoint, transport, store) {
        Ok(raw) => {
            match extract_code(&raw) {
                Ok(src) => {
                    let parsed = parse(&src);
                    if let Some(spec) = &parsed.spec {
                        record.lint_diagnostics = lint(spec);
                    }
                    record.parse = Some(ParseOutcome { ok: parsed.spec.is_some(), diagnostics: parsed.diagnostics });
                    record.extracted_source = Some(src);
                }
                Err(e) => record.extract_error = Some(e),
            }
            record.raw_response = Some(raw);
        }
        Err(e) => record.send_error = Some(e),
    }
    let manual: Vec<Annotation> =
        options.annotations.iter().filter(|a| a.case_id == u32::from(case_id)).cloned().collect();
    if !manual.is_empty() {
        let report = score(&merge(&record.diagnostics(), &manual));
        record.score = Some(ScoreReport { case_id: Some(u32::from(case_id)), ..report });
    }
    record.finished_at = now();
    record
}

/// Runs every config through assemble → send → extract → parse → lint →
/// score, then persists the records. Per-case failures stay on their record;
/// only unreadable assets or an unwritable run directory fail the batch.
pub fn run_pipeline(
    configs: &[PromptConfig],
    assets: &PromptAssets,
    endpoint: &EndpointConfig,
    transport: &dyn Transport,
    options: &PipelineOptions,
) -> Result<PipelineRun, PipelineError> {
    let mut prompts = Vec::with_capacity(configs.len());
    for (index, c) in configs.iter().enumerate() {
        if c.case_id.is_none() {
            return Err(PipelineError::MissingCaseId { index });
        }
        prompts.push(assemble(c, assets)?);
    }
    let store = FixtureStore::default();
    let jobs: Vec<(&PromptConfig, String)> = configs.iter().zip(prompts).collect();
    let records =
        batch::map(&jobs, options.threads, |(c, p)| run_case(c, p.clone(), endpoint, transport, &store, options));
    let run_dir = match &options.runs_dir {
        Some(root) => Some(persist(root, &records)?),
        None => None,
    };
    Ok(PipelineRun { records, run_dir })
}

fn fresh_dir(root: &Path) -> std::io::Result<PathBuf> {
    fs::create_dir_all(root)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let mut n = 0;
    loop {
        let name = if n == 0 { stamp.clone() } else { format!("{stamp}-{n}") };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => n += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Writes `<root>/<timestamp>/case-NN/{record.json,prompt.txt,response.txt,extracted.symboleo}`.
pub fn persist(root: &Path, records: &[RunRecord]) -> std::io::Result<PathBuf> {
    let dir = fresh_dir(root)?;
    for r in records {
        let case_dir = dir.join(format!("case-{:02}", r.case_id));
        fs::create_dir_all(&case_dir)?;
        let json = serde_json::to_string_pretty(r).map_err(std::io::Error::other)?;
        fs::write(case_dir.join("record.json"), json + "\n")?;
        fs::write(case_dir.join("prompt.txt"), &r.prompt)?;
        if let Some(raw) = &r.raw_response {
            fs::write(case_dir.join("response.txt"), raw)?;
        }
        if let Some(src) = &r.extracted_source {
            fs::write(case_dir.join("extracted.symboleo"), src)?;
        }
    }
    Ok(dir)
}

/// Reads back every `case-NN/record.json` under a run directory, by case id.
pub fn load_run(dir: &Path) -> std::io::Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path().join("record.json");
        if path.is_file() {
            let text = fs::read_to_string(&path)?;
            let r: RunRecord = serde_json::from_str(&text).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
            })?;
            out.push(r);
        }
    }
    out.sort_by_key(|r| r.case_id);
    Ok(out)
}
