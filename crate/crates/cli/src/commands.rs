use crate::output::{self, csv_rows, Out};
use crate::{Cli, Command, Format};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use symboleo_core::diagnostic::Diagnostic;
use symboleo_core::harness::{self, EndpointConfig, HttpTransport, Mode, PipelineOptions, RunRecord};
use symboleo_core::linter::{lint_with, LintOptions};
use symboleo_core::parser::{parse_with, ParseOptions};
use symboleo_core::promptgen::{assemble_with, paper_matrix, EmotionalPlacement, PromptAssets, PromptConfig};
use symboleo_core::report::{frequency_csv, frequency_text, ReportTable};
use symboleo_core::scorer::{
    compare, default_bands, frequency, load_annotations, merge, score, score_cases, Annotation, Finding, ScoreReport,
    SectionTotals,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum View {
    Table,
    Frequency,
    Both,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Comma-separated case ids, or `all`.
    #[arg(long, default_value = "all")]
    pub cases: String,
    #[arg(long, default_value = "replay")]
    pub mode: Mode,
    /// Endpoint name; also the fixture and record directory name.
    #[arg(long, default_value = "gpt-4o")]
    pub endpoint: String,
    #[arg(long, default_value = "fixtures")]
    pub fixtures: PathBuf,
    #[arg(long, default_value = "assets")]
    pub assets: PathBuf,
    /// Parent directory of the timestamped run directory.
    #[arg(long, default_value = "runs")]
    pub runs: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub threads: usize,
    /// Split prompts longer than this many characters into several turns.
    #[arg(long)]
    pub max_chars: Option<usize>,
    #[arg(long, default_value = "https://api.openai.com/v1")]
    pub base_url: String,
    /// Model identifier sent to the endpoint; defaults to the endpoint name.
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    pub api_key_env: String,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 120)]
    pub timeout: u64,
    /// Manual annotations for this endpoint; annotated cases get a score.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

pub fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let mut out = Out::new(cli.quiet);
    match &cli.command {
        Command::Parse { path, fragment } => check(&mut out, cli.format, path, *fragment, false),
        Command::Lint { path, fragment } => check(&mut out, cli.format, path, *fragment, true),
        Command::Score { annotations, case, lint, fragment, compare, against, margin } => score_cmd(
            &mut out,
            cli.format,
            ScoreArgs {
                annotations,
                case: *case,
                lint: lint.as_deref(),
                fragment: *fragment,
                compare: compare.as_deref(),
                against: *against,
                margin: *margin,
            },
        ),
        Command::Prompts { outdir, assets, emotional_after_base, grammar } => {
            prompts(&mut out, outdir, assets, *emotional_after_base, grammar.as_deref())
        }
        Command::Run(args) => run(&mut out, cli.format, args),
        Command::Report { inputs, view } => report(&mut out, cli.format, inputs, *view),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parser diagnostics, then (when asked and a tree exists) checker diagnostics.
fn diagnose(source: &str, fragment: bool, with_lint: bool) -> Vec<Diagnostic> {
    let parsed = parse_with(source, ParseOptions { fragment });
    let mut diags = parsed.diagnostics;
    if let (true, Some(spec)) = (with_lint, &parsed.spec) {
        diags.extend(lint_with(spec, LintOptions { fragment }));
    }
    diags
}

fn check(out: &mut Out, format: Format, path: &Path, fragment: bool, with_lint: bool) -> Result<ExitCode> {
    let source = read(path)?;
    let diags = diagnose(&source, fragment, with_lint);
    output::diagnostics(out, format, &path.display().to_string(), &diags);
    Ok(if diags.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

struct ScoreArgs<'a> {
    annotations: &'a Path,
    case: Option<u32>,
    lint: Option<&'a Path>,
    fragment: bool,
    compare: Option<&'a Path>,
    against: Option<u32>,
    margin: u32,
}

fn load_ann_file(path: &Path) -> Result<Vec<Annotation>> {
    load_annotations(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_table(path: &Path) -> Result<ReportTable> {
    let text = read(path)?;
    let table = if is_json_lines(path) {
        ReportTable::from_json_lines(&text).map_err(anyhow::Error::from)
    } else {
        ReportTable::from_csv(&text).map_err(anyhow::Error::from)
    };
    table.with_context(|| format!("in {}", path.display()))
}

fn is_json_lines(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("jsonl" | "json"))
}

fn render_table(out: &mut Out, format: Format, table: &ReportTable) {
    match format {
        Format::Text => out.push(&table.to_text()),
        Format::Csv => out.push(&table.to_csv()),
        Format::JsonLines => out.push(&table.to_json_lines()),
    }
}

#[derive(Serialize)]
struct Comparison {
    case: u32,
    against: u32,
    total: u32,
    against_total: u32,
    difference: u32,
    margin: u32,
    result: String,
}

fn score_cmd(out: &mut Out, format: Format, args: ScoreArgs<'_>) -> Result<ExitCode> {
    let anns = load_ann_file(args.annotations)?;
    let reports: Vec<ScoreReport> = match args.case {
        None => score_cases(&anns),
        Some(case) => {
            let manual: Vec<Annotation> = anns.into_iter().filter(|a| a.case_id == case).collect();
            let auto = match args.lint {
                Some(p) => diagnose(&read(p)?, args.fragment, true),
                None => Vec::new(),
            };
            vec![ScoreReport { case_id: Some(case), ..score(&merge(&auto, &manual)) }]
        }
    };
    if reports.is_empty() {
        // Nothing annotated: the table is just an all-zero total row.
        match format {
            Format::JsonLines => out.json(&ScoreReport::from_sections(None, SectionTotals::default())),
            _ => render_table(out, format, &ReportTable::default()),
        }
        return Ok(ExitCode::SUCCESS);
    }
    let table = ReportTable::from_reports(&reports);
    let Some(other_path) = args.compare else {
        render_table(out, format, &table);
        return Ok(ExitCode::SUCCESS);
    };
    let this = &reports[0];
    let case = this.case_id.expect("scored case");
    let against = args.against.unwrap_or(case);
    let other_table = load_table(other_path)?;
    let other =
        other_table.row(against).ok_or_else(|| anyhow!("{} has no row for case {against}", other_path.display()))?;
    let other_report = ScoreReport { case_id: Some(against), per_section: other.per_section, total: other.total };
    let result = compare(this, &other_report, args.margin);
    let c = Comparison {
        case,
        against,
        total: this.total,
        against_total: other.total,
        difference: this.total.abs_diff(other.total),
        margin: args.margin,
        result: format!("{result:?}"),
    };
    match format {
        Format::Text => out.line(&format!(
            "case {} ({}) vs case {} ({}): difference {}, margin {}: {}",
            c.case, c.total, c.against, c.against_total, c.difference, c.margin, c.result
        )),
        Format::Csv => out.push(&csv_rows(&[c], &[])),
        Format::JsonLines => out.json(&c),
    }
    Ok(ExitCode::SUCCESS)
}

fn prompts(out: &mut Out, outdir: &Path, assets: &Path, after_base: bool, grammar: Option<&Path>) -> Result<ExitCode> {
    let mut assets = PromptAssets::load(assets)?;
    if let Some(g) = grammar {
        assets = assets.with_grammar_file(g)?;
    }
    let placement = if after_base { EmotionalPlacement::AfterBase } else { EmotionalPlacement::BeforeQuery };
    // Assemble everything first so a missing asset leaves the output untouched.
    let built: Vec<(PromptConfig, String)> = paper_matrix()
        .into_iter()
        .map(|c| assemble_with(&c, &assets, placement).map(|p| (c, p)))
        .collect::<Result<_, _>>()?;
    fs::create_dir_all(outdir).with_context(|| format!("creating {}", outdir.display()))?;
    for (c, p) in &built {
        let path = outdir.join(format!("case-{:02}.txt", c.case_id.expect("matrix cases are numbered")));
        fs::write(&path, p).with_context(|| format!("writing {}", path.display()))?;
    }
    out.line(&format!("wrote {} prompts to {}", built.len(), outdir.display()));
    Ok(ExitCode::SUCCESS)
}

fn select_cases(spec: &str) -> Result<Vec<PromptConfig>> {
    let matrix = paper_matrix();
    if spec.trim() == "all" {
        return Ok(matrix);
    }
    spec.split(',')
        .map(|s| {
            let id: u8 = s.trim().parse().map_err(|_| anyhow!("invalid case id `{}`", s.trim()))?;
            matrix
                .iter()
                .find(|c| c.case_id == Some(id))
                .cloned()
                .ok_or_else(|| anyhow!("no matrix case {id} (expected 1-38)"))
        })
        .collect()
}

#[derive(Serialize)]
struct RunSummary {
    case: u8,
    parsed: bool,
    diagnostics: usize,
    score: Option<u32>,
    error: Option<String>,
}

impl From<&RunRecord> for RunSummary {
    fn from(r: &RunRecord) -> Self {
        RunSummary {
            case: r.case_id,
            parsed: r.parse.as_ref().is_some_and(|p| p.ok),
            diagnostics: r.diagnostics().len(),
            score: r.score.as_ref().map(|s| s.total),
            error: r
                .send_error
                .as_ref()
                .map(ToString::to_string)
                .or_else(|| r.extract_error.as_ref().map(ToString::to_string)),
        }
    }
}

fn run(out: &mut Out, format: Format, args: &RunArgs) -> Result<ExitCode> {
    let configs = select_cases(&args.cases)?;
    let endpoint = EndpointConfig {
        name: args.endpoint.clone(),
        base_url: args.base_url.clone(),
        model: args.model.clone().unwrap_or_else(|| args.endpoint.clone()),
        api_key_env: args.api_key_env.clone(),
        timeout_seconds: args.timeout,
        mode: args.mode,
        fixture_dir: Some(args.fixtures.clone()),
    };
    endpoint.validate()?;
    if args.mode != Mode::Replay {
        // Fail before any prompt is assembled or sent.
        if let Err(e) = endpoint.api_key() {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    }
    let annotations = match &args.annotations {
        Some(p) => load_ann_file(p)?,
        None => Vec::new(),
    };
    let assets = PromptAssets::load(&args.assets)?;
    let options = PipelineOptions {
        threads: args.threads.max(1),
        max_chars: args.max_chars,
        annotations,
        runs_dir: Some(args.runs.clone()),
    };
    let run = harness::run_pipeline(&configs, &assets, &endpoint, &HttpTransport, &options)?;
    let summaries: Vec<RunSummary> = run.records.iter().map(RunSummary::from).collect();
    match format {
        Format::Text => {
            for s in &summaries {
                let mut line = format!(
                    "case {:02}  {}  diagnostics {}",
                    s.case,
                    if s.parsed { "parsed" } else { "no tree" },
                    s.diagnostics
                );
                if let Some(t) = s.score {
                    line += &format!("  score {t}");
                }
                if let Some(e) = &s.error {
                    line += &format!("  error: {e}");
                }
                out.line(&line);
            }
            if let Some(dir) = &run.run_dir {
                out.line(&format!("records in {}", dir.display()));
            }
        }
        Format::Csv => out.push(&csv_rows(&summaries, &[])),
        Format::JsonLines => summaries.iter().for_each(|s| out.json(s)),
    }
    let failed = run.records.iter().any(RunRecord::transport_failed);
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn report(out: &mut Out, format: Format, inputs: &[PathBuf], view: View) -> Result<ExitCode> {
    let mut rows = Vec::new();
    let mut findings: Vec<Finding> = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let records = harness::load_run(input).with_context(|| format!("reading run {}", input.display()))?;
            if records.is_empty() {
                bail!("{} holds no run records", input.display());
            }
            for r in &records {
                findings.extend(r.diagnostics().iter().map(Finding::from));
            }
            let scored: Vec<ScoreReport> = records.iter().filter_map(|r| r.score.clone()).collect();
            rows.extend(ReportTable::from_reports(&scored).rows);
        } else if matches!(input.extension().and_then(|e| e.to_str()), Some("csv" | "jsonl" | "json")) {
            rows.extend(load_table(input)?.rows);
        } else {
            let anns = load_ann_file(input)?;
            findings.extend(anns.iter().map(Finding::from));
            rows.extend(ReportTable::from_reports(&score_cases(&anns)).rows);
        }
    }
    if rows.is_empty() && findings.is_empty() {
        bail!("no scored cases in the inputs");
    }
    rows.sort_by_key(|r| r.case_id);
    let table = ReportTable { rows };
    let freq = frequency(&findings, &default_bands());
    let show_table = view != View::Frequency;
    let show_freq = view != View::Table;
    if show_table {
        render_table(out, format, &table);
    }
    if show_table && show_freq {
        out.line("");
    }
    if show_freq {
        match format {
            Format::Text => out.push(&frequency_text(&freq)),
            Format::Csv => out.push(&frequency_csv(&freq)),
            Format::JsonLines => out.json(&freq),
        }
    }
    Ok(ExitCode::SUCCESS)
}
