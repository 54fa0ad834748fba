//! Command-line front end. Exit codes: 0 success, 2 bad usage or
//! parameters, 3 the computation itself failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dynamics::FixationQuery;
use crate::error::{FixationError, ParamError, SimError, SweepError};
use crate::figures::{write_figure, FigureId};
use crate::game::{AiProposerKind, GameParams, MonomorphicState, PopulationConfig, Role};
use crate::markov::{transition_report, TransitionReport};
use crate::mc::{simulate_fixation, simulate_long_run, SimConfig, RNG_IDENTITY};
use crate::numeric::fmt_sig;
use crate::output::{write_atomic, AtomicFile, RunManifest};
use crate::sweep::{
    threshold_search, tradeoff_frontier, write_grid_csv, CountRange, FrequencySummary, GridSpec,
    SweepRecord, CSV_HEADER, DOMINANCE_CUTOFF,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ugfair", version, about = "Ultimatum Game fairness in mixed human and AI populations")]
pub struct Cli {
    /// Worker threads for grid and simulation commands [default: all cores]
    #[arg(long, global = true, env = "UGFAIR_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary distribution over HH, HL, LH, LL and the human H fractions
    Stationary {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Fixation probability of one move, or the full transition report
    Fixation {
        #[command(flatten)]
        model: ModelArgs,
        /// A move such as HL-HH
        #[arg(long, conflicts_with = "all_edges", required_unless_present = "all_edges")]
        edge: Option<String>,
        #[arg(long)]
        all_edges: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Parameter grid to CSV, or a critical-mass scan
    Sweep(SweepArgs),
    /// Agent-based simulation
    Simulate {
        #[command(subcommand)]
        mode: SimulateMode,
    },
    /// CSV bundle behind one figure
    Figure {
        /// fig1, fig3, fig4, fig5, fig6, fig7, fig8 or fig9
        id: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// High offer / threshold
    #[arg(long, default_value_t = 0.5)]
    pub h: f64,
    /// Low offer / threshold
    #[arg(long, default_value_t = 0.1)]
    pub l: f64,
    /// Human population size in both roles
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub np: Option<u32>,
    #[arg(long)]
    pub nr: Option<u32>,
    /// AI proposers
    #[arg(long, default_value_t = 0)]
    pub mp: u32,
    /// AI receivers
    #[arg(long, default_value_t = 0)]
    pub mr: u32,
    /// Selection intensity
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = AiProposerKind::Samaritan)]
    pub kind: AiProposerKind,
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<(PopulationConfig, GameParams), ParamError> {
        let n = self.n.unwrap_or(100);
        let cfg = PopulationConfig {
            n_p: self.np.unwrap_or(n),
            n_r: self.nr.unwrap_or(n),
            m_p: self.mp,
            m_r: self.mr,
            ai_proposer_kind: self.kind,
            beta: self.beta,
        };
        cfg.validate()?;
        let game = GameParams::new(self.h, self.l)?;
        Ok((cfg, game))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdAxis {
    Mr,
    Mp,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Grid description (TOML); defaults to the robustness lattice of --kind
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; a manifest is written beside it
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scan for the smallest AI count in this role that makes HH dominant
    #[arg(long, value_enum, conflicts_with = "frontier")]
    pub threshold: Option<ThresholdAxis>,
    /// Minimal M_R for every M_P in 0..=N
    #[arg(long)]
    pub frontier: bool,
    /// Stationary HH mass that counts as dominant in scans
    #[arg(long, default_value_t = DOMINANCE_CUTOFF)]
    pub cutoff: f64,
    /// Selection intensity for scans; overrides the grid's list otherwise
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    #[arg(long)]
    pub kind: Option<AiProposerKind>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub np: Option<u32>,
    #[arg(long)]
    pub nr: Option<u32>,
    /// Fixed AI proposer count for scans over M_R
    #[arg(long)]
    pub mp: Option<u32>,
    /// Fixed AI receiver count for scans over M_P
    #[arg(long)]
    pub mr: Option<u32>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateMode {
    /// Fixation of a single mutant for one move, mutation off
    Fixation {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        edge: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Step budget per trial
        #[arg(long, default_value = "1e7", value_parser = parse_count)]
        steps: u64,
        #[command(flatten)]
        common: SimCommon,
    },
    /// Long run of both populations with mutation; time spent in each corner
    Longrun {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-4)]
        mu: f64,
        #[arg(long, default_value = "1e8", value_parser = parse_count)]
        steps: u64,
        /// Independent realizations, pooled
        #[arg(long, default_value_t = 1)]
        realizations: u64,
        #[command(flatten)]
        common: SimCommon,
    },
}

#[derive(Debug, Args)]
pub struct SimCommon {
    /// Required; there is no default seed
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Accepts `100000`, `1e5` or `1_000`.
fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a positive whole number")),
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<FixationError> for CliError {
    fn from(e: FixationError) -> Self {
        match e {
            FixationError::Param(p) => p.into(),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Param(p) => p.into(),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Param(p) => p.into(),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn parse_edge(s: &str) -> Result<(MonomorphicState, MonomorphicState), ParamError> {
    let (a, b) = s
        .split_once(['-', ':'])
        .ok_or_else(|| ParamError::Invalid(format!("edge `{s}` must look like HL-HH")))?;
    let (from, to) = (a.trim().parse()?, b.trim().parse()?);
    if MonomorphicState::single_move(from, to).is_none() {
        return Err(ParamError::Invalid(format!(
            "`{s}` changes both populations or neither; only single moves have a fixation probability"
        )));
    }
    Ok((from, to))
}

fn workers(cli: Option<usize>) -> usize {
    cli.filter(|&w| w > 0).unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    })
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let workers = workers(cli.workers);
    match cli.command {
        Command::Stationary { model, format } => cmd_stationary(&model, format),
        Command::Fixation {
            model,
            edge,
            all_edges: _,
            format,
        } => cmd_fixation(&model, edge.as_deref(), format),
        Command::Sweep(args) => cmd_sweep(&args, workers),
        Command::Simulate { mode } => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| CliError::Failure(e.to_string()))?
                .install(|| cmd_simulate(mode))
        }
        Command::Figure { id, out } => {
            let id: FigureId = id.parse()?;
            let listing: String = write_figure(id, &out, workers)?
                .iter()
                .map(|p| format!("{}\n", p.display()))
                .collect();
            say(&listing)
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) just ends the output.
fn say(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &impl Serialize) -> Result<(), CliError> {
    say(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"))
}

fn warn_untested(cfg: &PopulationConfig) {
    if cfg.is_untested_combination() {
        eprintln!("note: discriminatory AI proposers with AI receivers is an untested combination");
    }
}

fn cmd_stationary(model: &ModelArgs, format: Format) -> Result<(), CliError> {
    let (cfg, game) = model.resolve()?;
    warn_untested(&cfg);
    let rec = SweepRecord::compute(&cfg, &game)?;
    match format {
        Format::Csv => say(&format!("{CSV_HEADER}\n{}\n", rec.csv_row())),
        Format::Json => print_json(&rec),
    }
}

fn cmd_fixation(model: &ModelArgs, edge: Option<&str>, format: Format) -> Result<(), CliError> {
    let (cfg, game) = model.resolve()?;
    warn_untested(&cfg);
    let wanted = edge.map(parse_edge).transpose()?;
    let report = transition_report(&cfg, &game)?;
    match (wanted, format) {
        (Some((from, to)), Format::Csv) => {
            let e = report.edge(from, to).expect("every single move is reported");
            say(&format!("{}\n{}\n", TransitionReport::CSV_HEADER, e.csv_row()))
        }
        (Some((from, to)), Format::Json) => print_json(report.edge(from, to).expect("reported")),
        (None, Format::Csv) => say(&report.to_csv()),
        (None, Format::Json) => print_json(&report),
    }
}

fn load_spec(args: &SweepArgs) -> Result<GridSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<GridSpec>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => GridSpec::robustness(args.kind.unwrap_or_default()),
    };
    if let Some(k) = args.kind {
        spec.ai_proposer_kind = k;
    }
    if let Some(n) = args.n {
        spec.n_p = n;
        spec.n_r = n;
    }
    if let Some(n) = args.np {
        spec.n_p = n;
    }
    if let Some(n) = args.nr {
        spec.n_r = n;
    }
    if let Some(m) = args.mp {
        spec.m_p = CountRange::single(m);
    }
    if let Some(m) = args.mr {
        spec.m_r = CountRange::single(m);
    }
    if let Some(h) = args.h {
        spec.h = crate::sweep::ValueRange::single(h);
    }
    if let Some(l) = args.l {
        spec.l = crate::sweep::ValueRange::single(l);
    }
    if let Some(b) = &args.beta {
        spec.beta = b.clone();
    }
    spec.validate()?;
    Ok(spec)
}

/// Single-point parameters for scans, defaults at the baseline.
fn scan_base(args: &SweepArgs) -> Result<(PopulationConfig, GameParams), CliError> {
    let beta = match args.beta.as_deref() {
        Some([b]) => *b,
        Some(_) => return Err(CliError::Usage("scans take exactly one --beta".into())),
        None => 1.0,
    };
    let n = args.n.unwrap_or(100);
    let cfg = PopulationConfig {
        n_p: args.np.unwrap_or(n),
        n_r: args.nr.unwrap_or(n),
        m_p: args.mp.unwrap_or(0),
        m_r: args.mr.unwrap_or(0),
        ai_proposer_kind: args.kind.unwrap_or_default(),
        beta,
    };
    cfg.validate()?;
    let game = GameParams::new(args.h.unwrap_or(0.5), args.l.unwrap_or(0.1))?;
    Ok((cfg, game))
}

/// Writes `body` either to `out` (atomically, with a manifest) or to stdout.
fn emit(
    out: Option<&Path>,
    body: &str,
    manifest: RunManifest,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut m = manifest;
            let written = write_atomic(path, body)?;
            m.output(&written);
            m.write(&RunManifest::path_for(&written))?;
        }
        None => say(body)?,
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, workers: usize) -> Result<(), CliError> {
    if args.threshold.is_some() || args.frontier {
        let (cfg, game) = scan_base(args)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Failure(e.to_string()))?;
        #[derive(Serialize)]
        struct Scan<'a> {
            cfg: &'a PopulationConfig,
            game: &'a GameParams,
            cutoff: f64,
            mode: &'static str,
        }
        let (mode, body) = if let Some(axis) = args.threshold {
            let (vary, limit, name) = match axis {
                ThresholdAxis::Mr => (Role::Receiver, cfg.n_r, "M_R"),
                ThresholdAxis::Mp => (Role::Proposer, cfg.n_p, "M_P"),
            };
            let m = threshold_search(&cfg, &game, vary, limit, args.cutoff)?;
            (
                "threshold",
                format!(
                    "ai_kind,N_P,N_R,h,l,beta,vary,threshold\n{},{},{},{},{},{},{name},{m}\n",
                    cfg.ai_proposer_kind,
                    cfg.n_p,
                    cfg.n_r,
                    fmt_sig(game.h),
                    fmt_sig(game.l),
                    fmt_sig(cfg.beta)
                ),
            )
        } else {
            let cols = CountRange { start: 0, stop: cfg.n_p, step: 1 };
            let pts = pool.install(|| tradeoff_frontier(&cfg, &game, cols, cfg.n_r, args.cutoff))?;
            let mut body = String::from("beta,M_P,M_R\n");
            for p in pts {
                let mr = p.m_r.map_or_else(|| "NA".into(), |m| m.to_string());
                body.push_str(&format!("{},{},{mr}\n", fmt_sig(cfg.beta), p.m_p));
            }
            ("frontier", body)
        };
        let params = Scan { cfg: &cfg, game: &game, cutoff: args.cutoff, mode };
        return emit(args.out.as_deref(), &body, RunManifest::new(format!("sweep {mode}"), &params));
    }

    let spec = load_spec(args)?;
    let mut freq = FrequencySummary::default();
    let summary = match &args.out {
        Some(path) => {
            let mut f = AtomicFile::create(path)?;
            let s = write_grid_csv(&spec, workers, &mut f, |r| freq.push(r))?;
            f.flush()?;
            let written = f.commit()?;
            let mut m = RunManifest::new("sweep", &spec);
            if spec.ai_proposer_kind == AiProposerKind::Discriminatory && !spec.m_r.values().iter().all(|&m| m == 0) {
                m.notes.push("discriminatory AI proposers with AI receivers is an untested combination".into());
            }
            m.notes.push(format!("skipped {} lattice points with l >= h", s.skipped));
            m.output(&written);
            m.write(&RunManifest::path_for(&written))?;
            s
        }
        None => {
            let mut lock = std::io::stdout().lock();
            match write_grid_csv(&spec, workers, &mut lock, |r| freq.push(r)) {
                Err(SweepError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
                r => r?,
            }
        }
    };
    let report = freq.report(summary.total);
    if args.out.is_some() {
        say(&report)
    } else {
        eprint!("{report}");
        Ok(())
    }
}

fn cmd_simulate(mode: SimulateMode) -> Result<(), CliError> {
    match mode {
        SimulateMode::Fixation {
            model,
            edge,
            trials,
            steps,
            common,
        } => {
            let (cfg, game) = model.resolve()?;
            let (from, to) = parse_edge(&edge)?;
            let q = FixationQuery::for_edge(from, to, &cfg, &game).expect("checked single move");
            let sim = SimConfig {
                cfg,
                game,
                seed: common.seed,
                mutation_rate: 0.0,
                max_steps: steps,
                trials,
            };
            let est = simulate_fixation(&q, &sim)?;
            eprintln!(
                "p_hat {} +- {} over {} trials; {} timed out ({})",
                fmt_sig(est.p_hat),
                fmt_sig(est.stderr),
                est.trials,
                est.timeouts,
                fmt_sig(est.timeout_fraction())
            );
            let body = format!("{}\n{}", TransitionReport::CSV_HEADER, est.to_csv_row(&q));
            let manifest = RunManifest::new("simulate fixation", &sim).with_rng(RNG_IDENTITY, sim.seed);
            emit(common.out.as_deref(), &body, manifest)
        }
        SimulateMode::Longrun {
            model,
            mu,
            steps,
            realizations,
            common,
        } => {
            let (cfg, game) = model.resolve()?;
            let sim = SimConfig {
                cfg,
                game,
                seed: common.seed,
                mutation_rate: mu,
                max_steps: steps,
                trials: realizations,
            };
            let occ = simulate_long_run(&sim)?;
            eprintln!(
                "argmax {}; monomorphic {} of {} recorded steps",
                occ.argmax(),
                fmt_sig(occ.monomorphic_fraction),
                occ.recorded_steps
            );
            let mut manifest = RunManifest::new("simulate longrun", &sim).with_rng(RNG_IDENTITY, sim.seed);
            manifest
                .notes
                .push("one mutation rate for both roles, applied to whichever learner is drawn".into());
            emit(common.out.as_deref(), &occ.to_csv(), manifest)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e8"), Ok(100_000_000));
        assert_eq!(parse_count("250_000"), Ok(250_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("0").is_ok());
    }

    #[test]
    fn edges_parse_only_single_moves() {
        assert_eq!(parse_edge("HL-HH").unwrap(), (MonomorphicState::HL, MonomorphicState::HH));
        assert!(parse_edge("HH-LL").is_err());
        assert!(parse_edge("HH").is_err());
        assert!(parse_edge("XX-HH").is_err());
    }

    #[test]
    fn parameter_errors_are_usage_errors() {
        assert_eq!(run(["ugfair", "stationary", "--h", "0.3", "--l", "0.5"]), EXIT_USAGE);
        assert_eq!(run(["ugfair", "stationary", "--n", "1"]), EXIT_USAGE);
        assert_eq!(run(["ugfair", "simulate", "fixation", "--edge", "HL-HH"]), EXIT_USAGE);
        assert_eq!(run(["ugfair", "figure", "fig2"]), EXIT_USAGE);
    }

    #[test]
    fn scan_needs_one_beta() {
        let args = SweepArgs::try_parse_from_sweep(&["--threshold", "mr", "--beta", "1,2"]);
        assert!(matches!(scan_base(&args), Err(CliError::Usage(_))));
    }

    impl SweepArgs {
        fn try_parse_from_sweep(rest: &[&str]) -> SweepArgs {
            let mut argv = vec!["ugfair", "sweep"];
            argv.extend_from_slice(rest);
            match Cli::try_parse_from(argv).unwrap().command {
                Command::Sweep(a) => a,
                _ => unreachable!(),
            }
        }
    }
}
