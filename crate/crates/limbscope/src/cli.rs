//! Command-line interface.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use limbscope_core::significance::{CompareConfig, SidePair};
use limbscope_core::{Side, DEFAULT_HOP_S, DEFAULT_K_RANGE, DEFAULT_WINDOW_S};

use crate::api::{self, AppState};
use crate::engine::{self, CompareInputs, MAX_SERIES_POINTS};
use crate::fixtures::{self, FixtureKind, FixtureSpec};
use crate::ingest;
use crate::render;
use crate::session::{BrushRef, Cell, ExportFormat, PresentationDoc, Session};
use crate::store::{AssessmentQuery, DocumentStore};

#[derive(Debug, Parser)]
#[command(name = "limbscope", version, about = "Cross-limb EMG comparison: ingest, score, threshold and report")]
pub struct Cli {
    /// Directory holding the catalog, sessions and presentations.
    #[arg(long, env = "LIMBSCOPE_DATA_DIR", default_value = "limbscope-data", global = true)]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the files a manifest references; exit code 0 iff every check passes.
    Validate {
        #[arg(long, required = true, num_args = 1..)]
        manifest: Vec<PathBuf>,
    },
    /// Validate manifests and add them to the catalog.
    Ingest {
        #[arg(long, required = true, num_args = 1..)]
        manifest: Vec<PathBuf>,
    },
    /// Query the catalog.
    List {
        #[arg(long)]
        patient: Option<String>,
        #[arg(long)]
        motion: Option<String>,
        #[arg(long, value_parser = parse_side)]
        side: Option<Side>,
        #[arg(long)]
        page: Option<usize>,
    },
    /// Score a patient's affected limb against the unaffected one.
    Compare(CompareArgs),
    /// Render a presentation or a session's brushes.
    Report(ReportArgs),
    /// Write a synthetic dataset.
    Fixture(FixtureArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = DEFAULT_WINDOW_S)]
    pub window_s: f64,
    #[arg(long, default_value_t = DEFAULT_HOP_S)]
    pub hop_s: f64,
    #[arg(long, default_value_t = DEFAULT_K_RANGE.0)]
    pub k_min: usize,
    #[arg(long, default_value_t = DEFAULT_K_RANGE.1)]
    pub k_max: usize,
}

impl ConfigArgs {
    pub fn config(&self) -> CompareConfig {
        CompareConfig { window_s: self.window_s, hop_s: self.hop_s, k_min: self.k_min, k_max: self.k_max }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub patient: String,
    #[arg(long)]
    pub motion: String,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Add a threshold sweep with N steps from 0 to 1.
    #[arg(long, num_args = 0..=1, default_missing_value = "101", value_name = "N")]
    pub sweep: Option<usize>,
    /// Muscles to leave out of scoring and proportions.
    #[arg(long)]
    pub mute: Vec<String>,
    /// Apply this session's truncations, muted set and threshold.
    #[arg(long)]
    pub session: Option<String>,
    /// Result file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG chart page.
    #[arg(long)]
    pub chart: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, conflicts_with = "session", required_unless_present = "session")]
    pub presentation: Option<String>,
    #[arg(long)]
    pub session: Option<String>,
    #[arg(long, value_parser = parse_format, default_value = "static-render")]
    pub format: ExportFormat,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long, value_enum)]
    pub kind: FixtureKind,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "P1")]
    pub patient: String,
    #[arg(long, default_value = "shoulder_flexion")]
    pub motion: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Muscle at 3x amplitude for `--kind planted`.
    #[arg(long, default_value = "BIC")]
    pub planted: String,
    /// Also ingest the written manifests.
    #[arg(long)]
    pub ingest: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "LIMBSCOPE_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: String,
    #[command(flatten)]
    pub config: ConfigArgs,
}

fn parse_side(s: &str) -> Result<Side, String> {
    Side::parse(s).ok_or_else(|| format!("expected 'affected' or 'unaffected', got '{s}'"))
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    ExportFormat::parse(s).ok_or_else(|| format!("expected 'document' or 'static-render', got '{s}'"))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let open = || DocumentStore::open(&cli.data_dir).with_context(|| format!("opening {}", cli.data_dir.display()));
    match cli.command {
        Command::Validate { manifest } => {
            let mut ok = true;
            for path in &manifest {
                let report = ingest::validate(path);
                for f in &report.findings {
                    println!(
                        "{} {}: {}",
                        match (f.ok, f.warning) {
                            (false, _) => "FAIL",
                            (true, true) => "warn",
                            (true, false) => "ok  ",
                        },
                        f.file,
                        f.message
                    );
                }
                ok &= report.ok();
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Ingest { manifest } => {
            let store = open()?;
            for path in &manifest {
                let e = store.ingest_manifest(path).with_context(|| format!("ingesting {}", path.display()))?;
                println!("{} {} {} {} ({} channels)", e.id, e.patient_id, e.motion_type, e.side, e.channels);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::List { patient, motion, side, page } => {
            let store = open()?;
            let result = store.query_assessments(&AssessmentQuery { patient, motion, side, page })?;
            write_output(None, &to_json(&result))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let store = open()?;
            compare(&store, &args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report(args) => {
            let store = open()?;
            report(&store, &args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixture(args) => {
            let mut spec = FixtureSpec::new(args.kind, args.patient);
            spec.motion_type = args.motion;
            spec.seed = args.seed;
            spec.planted = args.planted;
            let manifests = fixtures::write(&spec, &args.out)?;
            let store = if args.ingest { Some(open()?) } else { None };
            for m in &manifests {
                println!("{}", m.display());
                if let Some(store) = &store {
                    store.ingest_manifest(m)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve(args) => {
            let config = args.config.config();
            config.validate()?;
            let state = AppState::new(Arc::new(open()?), config);
            tokio::runtime::Runtime::new()?.block_on(api::serve(state, &args.listen))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Runs `compare` and returns the result written.
pub fn compare(store: &DocumentStore, args: &CompareArgs) -> anyhow::Result<engine::CompareResult> {
    let config = args.config.config();
    let mut inputs = CompareInputs::new(args.patient.clone(), args.motion.clone(), config);
    let mut muted: BTreeSet<String> = args.mute.iter().cloned().collect();
    let mut tau = args.tau;
    if let Some(id) = &args.session {
        let session = store.load_session(id)?;
        inputs.truncations = SidePair {
            affected: session.truncation(&args.patient, &args.motion, Side::Affected),
            unaffected: session.truncation(&args.patient, &args.motion, Side::Unaffected),
        };
        if let Some(state) = session.comparison(&args.patient, &args.motion) {
            muted.extend(state.muted.iter().cloned());
            tau = state.tau;
        }
    }
    if !(0.0..=1.0).contains(&tau) {
        bail!("tau must be in [0, 1], got {tau}");
    }
    let computed = engine::compute(store, &inputs)?;
    let refined = engine::refine(&computed, &muted, tau)?;
    let result = engine::compare_result(&refined, args.sweep)?;
    write_output(args.out.as_deref(), &to_json(&result))?;
    if let Some(chart) = &args.chart {
        let payload = engine::payload(&computed.video, &refined, MAX_SERIES_POINTS);
        fs::write(chart, render::comparison_svg(&payload)).with_context(|| format!("writing {}", chart.display()))?;
    }
    if args.out.is_some() {
        println!("surviving at tau={tau}: {}", result.surviving.join(", "));
        if let Some(rows) = &result.sweep {
            println!("tau\tcharts\tsurviving");
            for r in rows {
                println!("{:.2}\t{}\t{}", r.tau, r.visible_charts, r.surviving.join(","));
            }
        }
    }
    Ok(result)
}

/// Presentation built from a session's brushes: rows are patients, columns are
/// "<motion> / <brush>", and each snapshot is computed now.
pub fn session_presentation(
    store: &DocumentStore,
    session: &Session,
    config: &CompareConfig,
) -> anyhow::Result<PresentationDoc> {
    let mut doc = PresentationDoc::new(format!("session-{}", session.id), format!("Session {}", session.id));
    doc.subtitle = session.owner.clone();
    for b in &session.brushes {
        let mut inputs = CompareInputs::new(b.patient_id.clone(), b.motion_type.clone(), config.clone());
        inputs.truncations = SidePair {
            affected: session.truncation(&b.patient_id, &b.motion_type, Side::Affected),
            unaffected: session.truncation(&b.patient_id, &b.motion_type, Side::Unaffected),
        };
        let muted = session.comparison(&b.patient_id, &b.motion_type).map(|c| c.muted.clone()).unwrap_or_default();
        let computed = engine::compute(store, &inputs)?;
        let refined = engine::refine(&computed, &muted, 0.0)?;
        let result = engine::brush(&refined, &computed.video, b.side, b.interval)?;
        let snapshot = result.summary.unwrap_or(limbscope_core::ProportionSummary {
            side: b.side,
            interval: b.interval,
            shares: Default::default(),
        });
        let column = format!("{} / {}", b.motion_type, b.id);
        if !doc.rows.contains(&b.patient_id) {
            doc.rows.push(b.patient_id.clone());
        }
        if !doc.columns.contains(&column) {
            doc.columns.push(column.clone());
        }
        doc.cells.push(Cell {
            row: b.patient_id.clone(),
            column,
            brush: BrushRef { session_id: session.id.clone(), brush_id: b.id.clone() },
            snapshot,
            annotation: b.note.clone(),
        });
    }
    Ok(doc)
}

pub fn report(store: &DocumentStore, args: &ReportArgs) -> anyhow::Result<()> {
    let doc = match (&args.presentation, &args.session) {
        (Some(id), _) => store.load_presentation(id)?,
        (None, Some(id)) => session_presentation(store, &store.load_session(id)?, &args.config.config())?,
        (None, None) => bail!("pass --presentation or --session"),
    };
    let bytes = store.export_presentation(&doc, args.format)?;
    write_output(Some(&args.out), &bytes)
}

impl Default for ConfigArgs {
    fn default() -> Self {
        ConfigArgs {
            window_s: DEFAULT_WINDOW_S,
            hop_s: DEFAULT_HOP_S,
            k_min: DEFAULT_K_RANGE.0,
            k_max: DEFAULT_K_RANGE.1,
        }
    }
}
