//! Command plumbing for the `readiness` binary. Deliberately thin: each
//! subcommand wires library calls together, writes fixed-name artifacts
//! under the output directory, and maps failures onto stable exit codes —
//! 0 success, 1 input/config error, 2 readiness gate failure, 3 integrity
//! failure.

use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::Digest;
use crate::lineage::EntryDraft;
use crate::{
    apply_plan, assess, build_report, canonical_bytes, diff_reports, load_dataset, load_sidecar,
    parse_plan, profile_dataset, render_diff_markdown, render_html, render_markdown, Actor,
    Dataset, LineageEntry, LineageError, LineageLedger, Operation, OperationDetail, Persona,
    QualityAssessment, ReadinessReport, ReportError, ReportInputs, Settings, UpdatedInputs,
};

const EXIT_ERROR: u8 = 1;
const EXIT_GATE: u8 = 2;
const EXIT_INTEGRITY: u8 = 3;

type DynError = Box<dyn Error>;

/// An error that carries its own exit code, so a failed readiness gate (2)
/// and detected tampering (3) are distinguishable from plain failures (1).
#[derive(Debug)]
struct Failure {
    exit: u8,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl Error for Failure {}

fn gate_failure(message: impl Into<String>) -> DynError {
    Box::new(Failure {
        exit: EXIT_GATE,
        message: message.into(),
    })
}

fn integrity_failure(message: impl Into<String>) -> DynError {
    Box::new(Failure {
        exit: EXIT_INTEGRITY,
        message: message.into(),
    })
}

#[derive(Parser)]
#[command(
    name = "readiness",
    version,
    about = "Data readiness reports for structured datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Profile a dataset (writes profile.baseline.json).
    Profile(ProfileArgs),
    /// Score the quality dimensions (writes assessment.baseline.json).
    Assess(AssessArgs),
    /// Apply a remediation plan (writes data.updated.csv).
    Remediate(RemediateArgs),
    /// Run the full pipeline and write the readiness report.
    Report(ReportArgs),
    /// Inspect, verify, or replay a lineage ledger.
    #[command(subcommand)]
    Lineage(LineageCommand),
    /// Compare two readiness reports saved as JSON.
    Diff(DiffArgs),
}

#[derive(Args)]
struct ActorArgs {
    /// Acting party recorded on ledger entries.
    #[arg(long, env = "READINESS_ACTOR", default_value = crate::TOOL_NAME)]
    actor: String,
    /// Persona of the acting party (data_steward, subject_matter_expert,
    /// data_scientist, ml_engineer, data_governance_officer, other).
    #[arg(long, env = "READINESS_PERSONA", default_value = "other",
          value_parser = Persona::from_str)]
    persona: Persona,
}

impl ActorArgs {
    fn to_actor(&self) -> Actor {
        Actor::new(&self.actor, self.persona)
    }
}

#[derive(Args)]
struct OutArgs {
    /// Directory artifacts are written into (fixed filenames).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct LedgerArgs {
    /// Lineage ledger path (default: ledger.jsonl under --out).
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Do not record this run on any ledger.
    #[arg(long, conflicts_with = "ledger")]
    no_ledger: bool,
}

impl LedgerArgs {
    fn resolve(&self, out_dir: &Path) -> Option<LineageLedger> {
        if self.no_ledger {
            return None;
        }
        let path = self
            .ledger
            .clone()
            .unwrap_or_else(|| out_dir.join("ledger.jsonl"));
        Some(LineageLedger::open(path))
    }
}

#[derive(Args)]
struct ProfileArgs {
    /// Input CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Settings TOML with optional [ingest] and [assess] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    ledger: LedgerArgs,
    #[command(flatten)]
    actor: ActorArgs,
}

#[derive(Args)]
struct AssessArgs {
    /// Input CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Settings TOML with optional [ingest] and [assess] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    ledger: LedgerArgs,
    /// Override the seed carried into recommended sampling steps.
    #[arg(long)]
    seed: Option<u64>,
    /// Exit 2 unless the overall score reaches this threshold.
    #[arg(long)]
    fail_below: Option<f64>,
    #[command(flatten)]
    actor: ActorArgs,
}

#[derive(Args)]
struct RemediateArgs {
    /// Input CSV file (must be the ledger's latest state).
    #[arg(long)]
    data: PathBuf,
    /// Remediation plan TOML.
    #[arg(long)]
    plan: PathBuf,
    /// Settings TOML with optional [ingest] and [assess] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    ledger: LedgerArgs,
    #[command(flatten)]
    actor: ActorArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Baseline CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Dataset sidecar TOML (description, governance, custom metadata).
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Settings TOML with optional [ingest] and [assess] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Remediation plan to apply and report on.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    ledger: LedgerArgs,
    /// Report format; repeat for several (report.json/report.md/report.html).
    #[arg(long, value_enum, default_values_t = [ReportFormat::Json])]
    format: Vec<ReportFormat>,
    /// Override the seed carried into recommended sampling steps.
    #[arg(long)]
    seed: Option<u64>,
    /// Exit 2 unless the final overall score reaches this threshold.
    #[arg(long)]
    fail_below: Option<f64>,
    #[command(flatten)]
    actor: ActorArgs,
}

#[derive(Subcommand)]
enum LineageCommand {
    /// Print ledger entries without verifying the chain.
    Show(LineageShowArgs),
    /// Check entry numbering, hash chaining, and timestamp order.
    Verify(LineageVerifyArgs),
    /// Rebuild the dataset by re-applying recorded remediation steps
    /// (writes data.replayed.csv).
    Replay(LineageReplayArgs),
}

#[derive(Args)]
struct LineageShowArgs {
    /// Lineage ledger (JSON Lines).
    #[arg(long)]
    ledger: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = TextFormat::Markdown)]
    format: TextFormat,
    /// Only entries recorded by this actor name.
    #[arg(long)]
    actor: Option<String>,
    /// Only entries at or after this RFC 3339 timestamp.
    #[arg(long)]
    since: Option<String>,
}

#[derive(Args)]
struct LineageVerifyArgs {
    /// Lineage ledger (JSON Lines).
    #[arg(long)]
    ledger: PathBuf,
}

#[derive(Args)]
struct LineageReplayArgs {
    /// Lineage ledger (JSON Lines).
    #[arg(long)]
    ledger: PathBuf,
    /// Baseline CSV the ledger starts from.
    #[arg(long)]
    data: PathBuf,
    /// Settings TOML with optional [ingest] and [assess] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stop after this entry id instead of replaying the whole ledger.
    #[arg(long)]
    upto: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct DiffArgs {
    /// Earlier report (JSON).
    report_a: PathBuf,
    /// Later report (JSON).
    report_b: PathBuf,
    /// Output format; repeat for several (requires --out for more than one).
    #[arg(long, value_enum, default_values_t = [TextFormat::Markdown])]
    format: Vec<TextFormat>,
    /// Write diff.json/diff.md under this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ReportFormat {
    Json,
    Markdown,
    Html,
}

impl ReportFormat {
    fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Json => "report.json",
            ReportFormat::Markdown => "report.md",
            ReportFormat::Html => "report.html",
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TextFormat {
    Json,
    Markdown,
}

pub fn run() -> ExitCode {
    // Usage errors are input errors (exit 1); --help/--version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let failed = err.use_stderr();
            let _ = err.print();
            return if failed {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Profile(args) => cmd_profile(args),
        Command::Assess(args) => cmd_assess(args),
        Command::Remediate(args) => cmd_remediate(args),
        Command::Report(args) => cmd_report(args),
        Command::Lineage(LineageCommand::Show(args)) => cmd_lineage_show(args),
        Command::Lineage(LineageCommand::Verify(args)) => cmd_lineage_verify(args),
        Command::Lineage(LineageCommand::Replay(args)) => cmd_lineage_replay(args),
        Command::Diff(args) => cmd_diff(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = err.source();
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            match err.downcast_ref::<Failure>() {
                Some(failure) => ExitCode::from(failure.exit),
                None => ExitCode::from(EXIT_ERROR),
            }
        }
    }
}

/// `SOURCE_DATE_EPOCH` pins every timestamp of a run, making artifact bytes
/// reproducible.
fn now() -> Result<DateTime<Utc>, DynError> {
    let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") else {
        return Ok(Utc::now());
    };
    let seconds: i64 = raw
        .trim()
        .parse()
        .map_err(|_| format!("SOURCE_DATE_EPOCH must be a unix timestamp, got {raw:?}"))?;
    Ok(DateTime::from_timestamp(seconds, 0)
        .ok_or(format!("SOURCE_DATE_EPOCH {seconds} is out of range"))?)
}

fn settings_from(config: Option<&Path>) -> Result<Settings, DynError> {
    Ok(match config {
        Some(path) => crate::settings::load_settings(path)
            .map_err(|e| format!("config {}: {e}", path.display()))?,
        None => Settings::default(),
    })
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, DynError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Artifacts are staged in memory and written together, so a failing run
/// leaves no partial outputs behind.
struct Artifacts {
    dir: PathBuf,
    staged: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    fn new(dir: &Path) -> Self {
        Artifacts {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        }
    }

    fn stage(&mut self, name: &str, bytes: Vec<u8>) {
        self.staged.push((self.dir.join(name), bytes));
    }

    fn write_all(self) -> Result<Vec<PathBuf>, DynError> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| format!("create {}: {e}", self.dir.display()))?;
        let mut written = Vec::new();
        for (path, bytes) in &self.staged {
            if let Err(e) = fs::write(path, bytes) {
                for done in &written {
                    let _ = fs::remove_file(done);
                }
                return Err(format!("write {}: {e}", path.display()).into());
            }
            written.push(path.clone());
        }
        Ok(written)
    }
}

/// Tampering and divergence exit 3; plain i/o or lookup failures exit 1.
fn lineage_err(err: LineageError) -> DynError {
    match err {
        LineageError::Io(_) | LineageError::UnknownEntry { .. } => Box::new(err),
        other => integrity_failure(other.to_string()),
    }
}

fn report_err(err: ReportError) -> DynError {
    match err {
        ReportError::Lineage(inner) => lineage_err(inner),
        other => integrity_failure(other.to_string()),
    }
}

fn check_gate(fail_below: Option<f64>, overall: Option<f64>) -> Result<(), DynError> {
    let Some(threshold) = fail_below else {
        return Ok(());
    };
    match overall {
        Some(score) if score >= threshold => Ok(()),
        Some(score) => Err(gate_failure(format!(
            "overall readiness {score:.4} is below the required {threshold}"
        ))),
        None => Err(gate_failure(format!(
            "--fail-below {threshold} was given, but no overall score is defined"
        ))),
    }
}

fn load_data(path: &Path, settings: &Settings) -> Result<Dataset, DynError> {
    if !path.exists() {
        return Err(format!("ingest: FileNotFound: {}", path.display()).into());
    }
    let dataset = load_dataset(path, &settings.ingest)
        .map_err(|e| format!("ingest {}: {e}", path.display()))?;
    for warning in dataset.ingest_warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(dataset)
}

fn record_ingest(
    ledger: &LineageLedger,
    dataset: &Dataset,
    actor: &Actor,
    now: DateTime<Utc>,
) -> Result<(), DynError> {
    ledger
        .append(EntryDraft {
            timestamp: now,
            actor: actor.clone(),
            operation: Operation::Ingest,
            operation_detail: OperationDetail::Ingest {
                source_path: dataset.source_path().to_string(),
                row_count: dataset.row_count() as u64,
                column_count: dataset.column_count() as u64,
            },
            input_digest: dataset.digest(),
            output_digest: dataset.digest(),
        })
        .map_err(lineage_err)?;
    Ok(())
}

fn record_profile(
    ledger: &LineageLedger,
    dataset: &Dataset,
    actor: &Actor,
    now: DateTime<Utc>,
) -> Result<(), DynError> {
    ledger
        .append(EntryDraft {
            timestamp: now,
            actor: actor.clone(),
            operation: Operation::Profile,
            operation_detail: OperationDetail::Profile {
                row_count: dataset.row_count() as u64,
                column_count: dataset.column_count() as u64,
            },
            input_digest: dataset.digest(),
            output_digest: dataset.digest(),
        })
        .map_err(lineage_err)?;
    Ok(())
}

fn record_assess(
    ledger: &LineageLedger,
    dataset: &Dataset,
    assessment: &QualityAssessment,
    actor: &Actor,
    now: DateTime<Utc>,
) -> Result<(), DynError> {
    let dimension_scores: BTreeMap<String, Option<f64>> = assessment
        .findings
        .iter()
        .map(|f| (f.dimension.name().to_string(), f.score))
        .collect();
    ledger
        .append(EntryDraft {
            timestamp: now,
            actor: actor.clone(),
            operation: Operation::Assess,
            operation_detail: OperationDetail::Assess {
                overall_score: assessment.overall_score,
                dimension_scores,
            },
            input_digest: dataset.digest(),
            output_digest: dataset.digest(),
        })
        .map_err(lineage_err)?;
    Ok(())
}

/// The digest a ledger says the data currently has: the last remediation
/// output, or the first recorded baseline when nothing was applied.
fn current_state(entries: &[LineageEntry]) -> Option<Digest> {
    entries
        .iter()
        .rev()
        .find_map(|e| match e.operation_detail {
            OperationDetail::RemediationStep { .. } => Some(e.output_digest),
            _ => None,
        })
        .or_else(|| entries.first().map(|e| e.output_digest))
}

fn cmd_profile(args: ProfileArgs) -> Result<(), DynError> {
    let now = now()?;
    let settings = settings_from(args.config.as_deref())?;
    let dataset = load_data(&args.data, &settings)?;
    let profile = profile_dataset(&dataset, now);
    let mut artifacts = Artifacts::new(&args.out.out);
    artifacts.stage("profile.baseline.json", to_json(&profile)?);
    if let Some(ledger) = args.ledger.resolve(&args.out.out) {
        let actor = args.actor.to_actor();
        record_ingest(&ledger, &dataset, &actor, now)?;
        record_profile(&ledger, &dataset, &actor, now)?;
    }
    let written = artifacts.write_all()?;
    println!(
        "profiled {} rows x {} columns (digest {}) -> {}",
        dataset.row_count(),
        dataset.column_count(),
        dataset.digest(),
        written[0].display()
    );
    Ok(())
}

fn cmd_assess(args: AssessArgs) -> Result<(), DynError> {
    let now = now()?;
    let mut settings = settings_from(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        settings.assess.random_seed = seed;
    }
    let dataset = load_data(&args.data, &settings)?;
    let profile = profile_dataset(&dataset, now);
    let assessment = assess(&dataset, &profile, &settings.assess, now)?;
    let mut artifacts = Artifacts::new(&args.out.out);
    artifacts.stage("assessment.baseline.json", to_json(&assessment)?);
    if let Some(ledger) = args.ledger.resolve(&args.out.out) {
        let actor = args.actor.to_actor();
        record_ingest(&ledger, &dataset, &actor, now)?;
        record_assess(&ledger, &dataset, &assessment, &actor, now)?;
    }
    artifacts.write_all()?;
    for finding in &assessment.findings {
        match finding.score {
            Some(score) => println!("{} {score:.4}", finding.dimension.name()),
            None => println!("{} n/a", finding.dimension.name()),
        }
    }
    match assessment.overall_score {
        Some(score) => println!("overall {score:.4}"),
        None => println!("overall n/a"),
    }
    check_gate(args.fail_below, assessment.overall_score)
}

fn cmd_remediate(args: RemediateArgs) -> Result<(), DynError> {
    let now = now()?;
    let settings = settings_from(args.config.as_deref())?;
    let dataset = load_data(&args.data, &settings)?;
    let plan = parse_plan(
        &fs::read_to_string(&args.plan).map_err(|e| format!("plan {}: {e}", args.plan.display()))?,
        now,
    )
    .map_err(|e| format!("plan {}: {e}", args.plan.display()))?;
    let ledger = args.ledger.resolve(&args.out.out);
    if let Some(ledger) = &ledger {
        // Steps must extend the recorded history linearly, or replay breaks.
        let entries = ledger.verify().map_err(lineage_err)?;
        if let Some(state) = current_state(&entries) {
            if state != dataset.digest() {
                return Err(integrity_failure(format!(
                    "dataset digest {} is not the ledger's current state {state}",
                    dataset.digest()
                )));
            }
        }
        record_ingest(ledger, &dataset, &args.actor.to_actor(), now)?;
    }
    let updated = apply_plan(&dataset, &plan, ledger.as_ref(), now)?;
    let mut artifacts = Artifacts::new(&args.out.out);
    artifacts.stage("data.updated.csv", canonical_bytes(&updated));
    let written = artifacts.write_all()?;
    println!(
        "applied {} steps: {} rows -> {} rows, digest {} -> {}",
        plan.steps.len(),
        dataset.row_count(),
        updated.row_count(),
        dataset.digest(),
        updated.digest()
    );
    println!("wrote {}", written[0].display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), DynError> {
    let now = now()?;
    let mut settings = settings_from(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        settings.assess.random_seed = seed;
    }
    let actor = args.actor.to_actor();
    let baseline = load_data(&args.data, &settings)?;
    let sidecar = match &args.sidecar {
        Some(path) => Some(
            load_sidecar(path).map_err(|e| format!("sidecar {}: {e}", path.display()))?,
        ),
        None => None,
    };
    let plan = match &args.plan {
        Some(path) => Some(
            parse_plan(
                &fs::read_to_string(path).map_err(|e| format!("plan {}: {e}", path.display()))?,
                now,
            )
            .map_err(|e| format!("plan {}: {e}", path.display()))?,
        ),
        None => None,
    };

    // With --no-ledger the run is still tracked — the report's lineage
    // section is its own story — but on a throwaway file.
    let (ledger, ephemeral) = match args.ledger.resolve(&args.out.out) {
        Some(ledger) => (ledger, None),
        None => {
            let path = std::env::temp_dir()
                .join(format!("readiness-{}.ledger.jsonl", std::process::id()));
            let _ = fs::remove_file(&path);
            (LineageLedger::open(&path), Some(path))
        }
    };
    let result = report_pipeline(&args, settings, actor, &baseline, sidecar, plan, &ledger, now);
    if let Some(path) = ephemeral {
        let _ = fs::remove_file(path);
    }
    result
}

#[allow(clippy::too_many_arguments)]
fn report_pipeline(
    args: &ReportArgs,
    settings: Settings,
    actor: Actor,
    baseline: &Dataset,
    sidecar: Option<crate::Sidecar>,
    plan: Option<crate::RemediationPlan>,
    ledger: &LineageLedger,
    now: DateTime<Utc>,
) -> Result<(), DynError> {
    let entries = ledger.verify().map_err(lineage_err)?;
    if let Some(first) = entries.first() {
        if first.input_digest != baseline.digest() {
            return Err(integrity_failure(format!(
                "ledger {} begins at digest {}, not at this dataset's digest {}",
                ledger.path().display(),
                first.input_digest,
                baseline.digest()
            )));
        }
    }
    if entries
        .iter()
        .any(|e| matches!(e.operation_detail, OperationDetail::RemediationStep { .. }))
    {
        return Err(format!(
            "ledger {} already records remediation; a report run needs a ledger \
             without prior remediation steps (one report history per ledger)",
            ledger.path().display()
        )
        .into());
    }

    record_ingest(ledger, baseline, &actor, now)?;
    let baseline_profile = profile_dataset(baseline, now);
    record_profile(ledger, baseline, &actor, now)?;
    let baseline_assessment = assess(baseline, &baseline_profile, &settings.assess, now)?;
    record_assess(ledger, baseline, &baseline_assessment, &actor, now)?;

    let mut artifacts = Artifacts::new(&args.out.out);
    artifacts.stage("profile.baseline.json", to_json(&baseline_profile)?);
    artifacts.stage("assessment.baseline.json", to_json(&baseline_assessment)?);

    // Updated profile/assessment are embedded in the report, not recorded as
    // extra ledger entries: a report run grows the ledger by exactly
    // ingest + profile + assess + one entry per plan step.
    let updated = match &plan {
        Some(plan) => Some(
            apply_plan(baseline, plan, Some(ledger), now)?.with_version_label("remediated"),
        ),
        None => None,
    };
    let updated_parts = match &updated {
        Some(dataset) => {
            let profile = profile_dataset(dataset, now);
            let assessment = assess(dataset, &profile, &settings.assess, now)?;
            artifacts.stage("data.updated.csv", canonical_bytes(dataset));
            artifacts.stage("profile.updated.json", to_json(&profile)?);
            artifacts.stage("assessment.updated.json", to_json(&assessment)?);
            Some((profile, assessment))
        }
        None => None,
    };

    let report = build_report(ReportInputs {
        baseline,
        baseline_profile: &baseline_profile,
        baseline_assessment: &baseline_assessment,
        updated: updated
            .as_ref()
            .zip(updated_parts.as_ref())
            .map(|(dataset, (profile, assessment))| UpdatedInputs {
                dataset,
                profile,
                assessment,
            }),
        ledger,
        sidecar: sidecar.as_ref(),
        generated_at: now,
    })
    .map_err(report_err)?;

    for format in dedup_formats(&args.format) {
        let bytes = match format {
            ReportFormat::Json => to_json(&report)?,
            ReportFormat::Markdown => render_markdown(&report).into_bytes(),
            ReportFormat::Html => render_html(&report).into_bytes(),
        };
        artifacts.stage(format.file_name(), bytes);
    }
    let written = artifacts.write_all()?;

    println!("{}", report.summary.headline);
    for path in &written {
        println!("wrote {}", path.display());
    }
    check_gate(args.fail_below, report.final_assessment().overall_score)
}

fn dedup_formats(formats: &[ReportFormat]) -> Vec<ReportFormat> {
    let mut seen = Vec::new();
    for format in formats {
        if !seen.contains(format) {
            seen.push(*format);
        }
    }
    seen
}

fn cmd_lineage_show(args: LineageShowArgs) -> Result<(), DynError> {
    let ledger = LineageLedger::open(&args.ledger);
    let since = match &args.since {
        Some(raw) => Some(
            DateTime::parse_from_rfc3339(raw)
                .map_err(|e| format!("--since must be an RFC 3339 timestamp: {e}"))?
                .with_timezone(&Utc),
        ),
        None => None,
    };
    let entries: Vec<LineageEntry> = ledger
        .read_entries()
        .map_err(lineage_err)?
        .into_iter()
        .filter(|e| args.actor.as_ref().map_or(true, |a| &e.actor.name == a))
        .filter(|e| since.map_or(true, |s| e.timestamp >= s))
        .collect();
    match args.format {
        TextFormat::Json => print!("{}", String::from_utf8_lossy(&to_json(&entries)?)),
        TextFormat::Markdown => {
            println!("| # | Timestamp | Actor | Operation | Input | Output |");
            println!("| --- | --- | --- | --- | --- | --- |");
            for e in &entries {
                println!(
                    "| {} | {} | {} ({}) | {} | {} | {} |",
                    e.entry_id,
                    e.timestamp.to_rfc3339(),
                    e.actor.name,
                    e.actor.persona.name(),
                    e.operation.name(),
                    &e.input_digest.to_hex()[..12],
                    &e.output_digest.to_hex()[..12],
                );
            }
        }
    }
    Ok(())
}

fn cmd_lineage_verify(args: LineageVerifyArgs) -> Result<(), DynError> {
    let ledger = LineageLedger::open(&args.ledger);
    let entries = ledger.verify().map_err(lineage_err)?;
    println!("ok: {} entries, hash chain intact", entries.len());
    Ok(())
}

fn cmd_lineage_replay(args: LineageReplayArgs) -> Result<(), DynError> {
    let settings = settings_from(args.config.as_deref())?;
    let baseline = load_data(&args.data, &settings)?;
    let ledger = LineageLedger::open(&args.ledger);
    let replayed = ledger.replay(&baseline, args.upto).map_err(lineage_err)?;
    let mut artifacts = Artifacts::new(&args.out.out);
    artifacts.stage("data.replayed.csv", canonical_bytes(&replayed));
    let written = artifacts.write_all()?;
    println!(
        "replay ok: {} rows, digest {} -> {}",
        replayed.row_count(),
        replayed.digest(),
        written[0].display()
    );
    Ok(())
}

fn cmd_diff(args: DiffArgs) -> Result<(), DynError> {
    let read_report = |path: &Path| -> Result<ReadinessReport, DynError> {
        let raw =
            fs::read_to_string(path).map_err(|e| format!("report {}: {e}", path.display()))?;
        Ok(serde_json::from_str(&raw).map_err(|e| format!("report {}: {e}", path.display()))?)
    };
    let report_a = read_report(&args.report_a)?;
    let report_b = read_report(&args.report_b)?;
    let diff = diff_reports(&report_a, &report_b);

    let formats: Vec<TextFormat> = {
        let mut seen = Vec::new();
        for f in &args.format {
            if !seen.contains(f) {
                seen.push(*f);
            }
        }
        seen
    };
    match &args.out {
        Some(dir) => {
            let mut artifacts = Artifacts::new(dir);
            for format in formats {
                match format {
                    TextFormat::Json => artifacts.stage("diff.json", to_json(&diff)?),
                    TextFormat::Markdown => {
                        artifacts.stage("diff.md", render_diff_markdown(&diff).into_bytes())
                    }
                }
            }
            for path in artifacts.write_all()? {
                println!("wrote {}", path.display());
            }
        }
        None => {
            if formats.len() > 1 {
                return Err("multiple --format values need --out".into());
            }
            match formats[0] {
                TextFormat::Json => print!("{}", String::from_utf8_lossy(&to_json(&diff)?)),
                TextFormat::Markdown => print!("{}", render_diff_markdown(&diff)),
            }
        }
    }
    Ok(())
}
