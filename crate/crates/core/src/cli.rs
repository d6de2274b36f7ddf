//! `blockvote` command line: `detect`, `generate`, `sweep` and `bench`.
//!
//! Exit codes: 0 success, 1 internal error, 2 bad flags or configuration,
//! 3 unreadable or malformed input files.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bigraph::{parse_edge_list, read_label_file, write_edge_list, ParsedEdgeList, Side};
use crate::density::{DensityParams, PeelPriority};
use crate::detect::{detect_blocks, DetectConfig};
use crate::ensemble::{apply_mva, run_ensemble, EnsembleConfig, EnsembleRun};
use crate::error::Error;
use crate::eval::{best_f1, sweep_threshold, write_sweep_csv};
use crate::sampling::SamplerKind;
use crate::synth::{generate, parse_blocks, SynthConfig};

/// Environment variable consulted for the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "BLOCKVOTE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "blockvote", version, about = "Ensemble dense-block fraud detection on user/merchant graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the ensemble and write detected users and merchants as JSON.
    Detect(DetectArgs),
    /// Generate a planted-block benchmark graph with ground truth.
    Generate(GenerateArgs),
    /// Run the ensemble once and evaluate every vote threshold 1..=N.
    Sweep(SweepArgs),
    /// Time full-graph detection against the ensemble.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Res,
    Ons,
    Tns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    User,
    Merchant,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::User => Side::User,
            SideArg::Merchant => Side::Merchant,
        }
    }
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    /// Edge list: `user<TAB>merchant` per line.
    #[arg(long)]
    edges: PathBuf,
    /// key=value parameter file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    sampler: Option<SamplerArg>,
    /// Side sampled by `ons`.
    #[arg(long, value_enum)]
    side: Option<SideArg>,
    /// Sample ratio S (user side for `tns`).
    #[arg(long)]
    ratio: Option<f64>,
    /// Merchant-side ratio for `tns`; defaults to --ratio.
    #[arg(long)]
    ratio_v: Option<f64>,
    /// Number of sampled subgraphs N.
    #[arg(long)]
    num_samples: Option<usize>,
    /// Vote threshold T; defaults to ceil(S*N/2).
    #[arg(long)]
    threshold: Option<usize>,
    /// Density constant c (> 1).
    #[arg(long)]
    c: Option<f64>,
    /// Maximum blocks detected per subgraph.
    #[arg(long)]
    kmax: Option<usize>,
    /// Keep all detected blocks instead of cutting at the truncating point.
    #[arg(long)]
    no_truncate: bool,
    /// Detect exactly K blocks per subgraph (implies --no-truncate).
    #[arg(long, value_name = "K")]
    fixed_k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to $BLOCKVOTE_WORKERS, then all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Peel by plain degree instead of weighted contribution.
    #[arg(long)]
    peel_by_degree: bool,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Output file (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Ground truth: one fraudulent user label per line.
    #[arg(long)]
    labels: PathBuf,
    /// CSV output file (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Blocks detected by the full-graph baseline.
    #[arg(long, default_value_t = 30)]
    baseline_k: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Directory receiving edges.tsv, labels.txt, blocks.tsv and generate.conf.
    #[arg(long)]
    out_dir: PathBuf,
    /// key=value generator settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    merchants: Option<usize>,
    /// Mean background degree of non-fraud users.
    #[arg(long)]
    avg_degree: Option<f64>,
    /// Planted blocks as COUNTxUSERSxMERCHANTSxPROB[,...].
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long)]
    camouflage: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(Error),
    Internal(Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Input(e) | CliError::Internal(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => CliError::Usage(m),
            Error::Parse { .. } => CliError::Input(e),
            other => CliError::Internal(other),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Detect(a) => cmd_detect(a, stdout),
        Command::Generate(a) => cmd_generate(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::Bench(a) => cmd_bench(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}

fn read_pairs(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_owned());
    }
    Ok(out)
}

fn take<T: std::str::FromStr>(pairs: &mut BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    match pairs.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config: bad value {v:?} for {key}"))),
    }
}

fn take_enum<T: ValueEnum>(pairs: &mut BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    match pairs.remove(key) {
        None => Ok(None),
        Some(v) => T::from_str(&v, true)
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config: bad value {v:?} for {key}"))),
    }
}

/// Fully resolved detection parameters; echoed in every manifest.
#[derive(Debug, Clone, Serialize)]
struct RunParams {
    sampler: SamplerKind,
    num_samples: usize,
    threshold: usize,
    repetition_rate: f64,
    c: f64,
    k_max: usize,
    truncate: bool,
    peel_by_degree: bool,
    seed: u64,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn resolve(args: &EnsembleArgs) -> CliResult<(EnsembleConfig<f64>, RunParams)> {
    let mut pairs = match &args.config {
        Some(p) => read_pairs(p)?,
        None => BTreeMap::new(),
    };
    let sampler = args.sampler.or(take_enum(&mut pairs, "sampler")?).unwrap_or(SamplerArg::Res);
    let side: Side = args.side.or(take_enum(&mut pairs, "side")?).unwrap_or(SideArg::Merchant).into();
    let ratio = args.ratio.or(take(&mut pairs, "ratio")?).unwrap_or(0.1);
    let ratio_v = args.ratio_v.or(take(&mut pairs, "ratio_v")?).unwrap_or(ratio);
    let num_samples = args.num_samples.or(take(&mut pairs, "num_samples")?).unwrap_or(80);
    let threshold = args.threshold.or(take(&mut pairs, "threshold")?);
    let c = args.c.or(take(&mut pairs, "c")?).unwrap_or(DensityParams::<f64>::DEFAULT_C);
    let mut k_max = args
        .kmax
        .or(take(&mut pairs, "kmax")?)
        .unwrap_or(DetectConfig::<f64>::DEFAULT_K_MAX);
    let no_truncate = args.no_truncate || take(&mut pairs, "no_truncate")?.unwrap_or(false);
    let fixed_k: Option<usize> = args.fixed_k.or(take(&mut pairs, "fixed_k")?);
    let seed = args.seed.or(take(&mut pairs, "seed")?).unwrap_or(0);
    let config_workers: Option<usize> = take(&mut pairs, "workers")?;
    let peel_by_degree = args.peel_by_degree || take(&mut pairs, "peel_by_degree")?.unwrap_or(false);
    if let Some(k) = pairs.keys().next() {
        return Err(CliError::Usage(format!("config: unknown key {k:?}")));
    }

    let workers = match args.workers.or(config_workers) {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{WORKERS_ENV}: bad worker count {v:?}")))?,
            Err(_) => default_workers(),
        },
    };

    let mut truncate = !no_truncate;
    if let Some(k) = fixed_k {
        k_max = k;
        truncate = false;
    }
    let sampler = match sampler {
        SamplerArg::Res => SamplerKind::Res { ratio },
        SamplerArg::Ons => SamplerKind::Ons { side, ratio },
        SamplerArg::Tns => SamplerKind::Tns { ratio_u: ratio, ratio_v },
    };
    let threshold = threshold.unwrap_or_else(|| default_threshold(ratio, num_samples));
    let config = EnsembleConfig {
        sampler,
        num_samples,
        threshold,
        detect: DetectConfig {
            density: DensityParams::new(c)?,
            k_max,
            truncate,
            priority: if peel_by_degree {
                PeelPriority::Degree
            } else {
                PeelPriority::Weighted
            },
        },
        master_seed: seed,
        workers,
    };
    config.validate()?;
    let params = RunParams {
        sampler,
        num_samples,
        threshold,
        repetition_rate: config.repetition_rate(),
        c,
        k_max,
        truncate,
        peel_by_degree,
        seed,
    };
    Ok((config, params))
}

/// Half the repetition rate, rounded up and clamped to `1..=N`.
fn default_threshold(ratio: f64, num_samples: usize) -> usize {
    let half = (ratio * num_samples as f64 / 2.0).ceil();
    (half.max(1.0) as usize).min(num_samples.max(1))
}

#[derive(Debug, Serialize)]
struct InputDigest {
    role: &'static str,
    path: String,
    bytes: usize,
    sha256: String,
}

fn read_input(role: &'static str, path: &Path) -> CliResult<(Vec<u8>, InputDigest)> {
    let data = fs::read(path).map_err(|e| CliError::Input(Error::Io(e)))?;
    let digest = InputDigest {
        role,
        path: path.display().to_string(),
        bytes: data.len(),
        sha256: hex::encode(Sha256::digest(&data)),
    };
    Ok((data, digest))
}

fn load_graph(path: &Path) -> CliResult<(ParsedEdgeList, InputDigest)> {
    let (data, digest) = read_input("edges", path)?;
    let parsed = parse_edge_list(data.as_slice()).map_err(|e| match e {
        Error::Parse { line, message } => CliError::Input(Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        }),
        other => CliError::Input(other),
    })?;
    Ok((parsed, digest))
}

#[derive(Debug, Serialize)]
struct GraphSummary {
    users: usize,
    merchants: usize,
    edges: usize,
    duplicate_edges: usize,
}

impl GraphSummary {
    fn of(p: &ParsedEdgeList) -> Self {
        GraphSummary {
            users: p.graph.n_users(),
            merchants: p.graph.n_merchants(),
            edges: p.graph.edge_count(),
            duplicate_edges: p.duplicate_edges,
        }
    }
}

/// Everything that varies between otherwise identical runs.
#[derive(Debug, Serialize)]
struct Runtime {
    workers: usize,
    timings_ms: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    params: RunParams,
    inputs: Vec<InputDigest>,
    graph: GraphSummary,
    runtime: Runtime,
}

struct Timer {
    start: Instant,
    timings: BTreeMap<&'static str, f64>,
}

impl Timer {
    fn new() -> Self {
        Timer {
            start: Instant::now(),
            timings: BTreeMap::new(),
        }
    }

    fn lap(&mut self, phase: &'static str) {
        let now = Instant::now();
        self.timings
            .insert(phase, (now - self.start).as_secs_f64() * 1e3);
        self.start = now;
    }
}

fn open_output<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Internal(Error::Io(e)))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(stdout)),
    }
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Internal(Error::Io(e.into())))?;
    writeln!(out).map_err(|e| CliError::Internal(Error::Io(e)))?;
    out.flush().map_err(|e| CliError::Internal(Error::Io(e)))
}

#[derive(Debug, Serialize)]
struct VoteHistogram {
    users: Vec<usize>,
    merchants: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct DetectOutput {
    manifest: RunManifest,
    detected_users: Vec<String>,
    detected_merchants: Vec<String>,
    vote_histogram: VoteHistogram,
}

fn ensemble_on(args: &EnsembleArgs, timer: &mut Timer) -> CliResult<(EnsembleConfig<f64>, RunParams, ParsedEdgeList, InputDigest, EnsembleRun)> {
    let (config, params) = resolve(args)?;
    let (parsed, digest) = load_graph(&args.edges)?;
    timer.lap("parse");
    if parsed.graph.edge_count() == 0 {
        return Err(CliError::Input(Error::NoEdges));
    }
    let run = run_ensemble(&parsed.graph, &config)?;
    timer.lap("ensemble");
    Ok((config, params, parsed, digest, run))
}

fn cmd_detect(args: DetectArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut timer = Timer::new();
    let (config, params, parsed, digest, run) = ensemble_on(&args.ensemble, &mut timer)?;
    let picked = apply_mva(&run.tally, config.threshold)?;
    timer.lap("vote");
    let labels = &parsed.labels;
    let out = DetectOutput {
        detected_users: picked.users.iter().map(|&u| labels.users()[u as usize].clone()).collect(),
        detected_merchants: picked
            .merchants
            .iter()
            .map(|&v| labels.merchants()[v as usize].clone())
            .collect(),
        vote_histogram: VoteHistogram {
            users: run.tally.user_histogram(),
            merchants: run.tally.merchant_histogram(),
        },
        manifest: RunManifest {
            tool: "blockvote",
            version: env!("CARGO_PKG_VERSION"),
            command: "detect",
            params,
            inputs: vec![digest],
            graph: GraphSummary::of(&parsed),
            runtime: Runtime {
                workers: config.workers,
                timings_ms: timer.timings,
            },
        },
    };
    let mut sink = open_output(&args.output, stdout)?;
    write_json(&out, &mut *sink)
}

fn cmd_sweep(args: SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let mut timer = Timer::new();
    let (_, _, parsed, _, run) = ensemble_on(&args.ensemble, &mut timer)?;
    let (label_bytes, _) = read_input("labels", &args.labels)?;
    let names = read_label_file(label_bytes.as_slice()).map_err(CliError::Input)?;
    let mut is_fraud = vec![false; parsed.graph.n_users()];
    let mut unknown = 0;
    for name in &names {
        match parsed.labels.lookup(Side::User, name) {
            Some(u) => is_fraud[u as usize] = true,
            None => unknown += 1,
        }
    }
    if unknown > 0 {
        let _ = writeln!(stderr, "note: {unknown} labeled users do not appear in the edge list and are ignored");
    }
    let rows = sweep_threshold(&run.tally, &is_fraud);
    {
        let mut sink = open_output(&args.output, stdout)?;
        write_sweep_csv(&rows, &mut *sink).map_err(CliError::Internal)?;
    }
    if let Some(best) = best_f1(&rows) {
        let _ = writeln!(
            stderr,
            "best F1 {:.6} at T={} (precision {:.6}, recall {:.6}, detected {})",
            best.f1,
            best.threshold.unwrap_or(0),
            best.precision,
            best.recall,
            best.detected_count
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct BenchOutput {
    manifest: RunManifest,
    baseline_k: usize,
    baseline_ms: f64,
    ensemble_ms: f64,
    /// ensemble time / baseline time
    ratio: f64,
    baseline_detected_users: usize,
    ensemble_detected_users: usize,
    ensemble_detected_merchants: usize,
}

fn cmd_bench(args: BenchArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if args.baseline_k == 0 {
        return Err(CliError::Usage("--baseline-k must be at least 1".into()));
    }
    let (config, params) = resolve(&args.ensemble)?;
    let mut timer = Timer::new();
    let (parsed, digest) = load_graph(&args.ensemble.edges)?;
    timer.lap("parse");
    if parsed.graph.edge_count() == 0 {
        return Err(CliError::Input(Error::NoEdges));
    }

    let baseline_cfg = DetectConfig::fixed_k(config.detect.density, args.baseline_k);
    let t0 = Instant::now();
    let baseline = detect_blocks(&parsed.graph, &baseline_cfg);
    let baseline_ms = t0.elapsed().as_secs_f64() * 1e3;
    timer.lap("baseline");

    let t0 = Instant::now();
    let run = run_ensemble(&parsed.graph, &config)?;
    let picked = apply_mva(&run.tally, config.threshold)?;
    let ensemble_ms = t0.elapsed().as_secs_f64() * 1e3;
    timer.lap("ensemble");

    let out = BenchOutput {
        baseline_k: args.baseline_k,
        baseline_ms,
        ensemble_ms,
        ratio: ensemble_ms / baseline_ms.max(f64::MIN_POSITIVE),
        baseline_detected_users: baseline.users.len(),
        ensemble_detected_users: picked.users.len(),
        ensemble_detected_merchants: picked.merchants.len(),
        manifest: RunManifest {
            tool: "blockvote",
            version: env!("CARGO_PKG_VERSION"),
            command: "bench",
            params,
            inputs: vec![digest],
            graph: GraphSummary::of(&parsed),
            runtime: Runtime {
                workers: config.workers,
                timings_ms: timer.timings,
            },
        },
    };
    let mut sink = open_output(&args.output, stdout)?;
    write_json(&out, &mut *sink)
}

#[derive(Debug, Serialize)]
struct GenerateOutput {
    config: SynthConfig,
    users: usize,
    merchants: usize,
    edges: usize,
    fraud_users: usize,
    fraud_merchants: usize,
    block_edges: Vec<usize>,
    files: BTreeMap<&'static str, String>,
}

fn cmd_generate(args: GenerateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut config = SynthConfig::standard(0);
    if let Some(p) = &args.config {
        config.apply_pairs(&read_pairs(p)?)?;
    }
    if let Some(v) = args.users {
        config.n_users = v;
    }
    if let Some(v) = args.merchants {
        config.n_merchants = v;
    }
    if let Some(v) = args.avg_degree {
        config.background_avg_user_degree = v;
    }
    if let Some(v) = &args.blocks {
        config.blocks = parse_blocks(v)?;
    }
    if let Some(v) = args.camouflage {
        config.camouflage_prob = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    let synth = generate(&config)?;
    let labels = synth.labels();

    let io = |e: std::io::Error| CliError::Internal(Error::Io(e));
    fs::create_dir_all(&args.out_dir).map_err(io)?;
    let path = |name: &str| args.out_dir.join(name);
    let mut files = BTreeMap::new();

    let edges_path = path("edges.tsv");
    write_edge_list(&synth.graph, &labels, BufWriter::new(File::create(&edges_path).map_err(io)?))
        .map_err(CliError::Internal)?;
    files.insert("edges", edges_path.display().to_string());

    let labels_path = path("labels.txt");
    let mut w = BufWriter::new(File::create(&labels_path).map_err(io)?);
    for &u in &synth.truth.fraud_users {
        writeln!(w, "{}", labels.users()[u as usize]).map_err(io)?;
    }
    w.flush().map_err(io)?;
    files.insert("labels", labels_path.display().to_string());

    let blocks_path = path("blocks.tsv");
    let mut w = BufWriter::new(File::create(&blocks_path).map_err(io)?);
    for (u, b) in synth.truth.user_block.iter().enumerate() {
        if let Some(b) = b {
            writeln!(w, "{}\tuser\t{b}", labels.users()[u]).map_err(io)?;
        }
    }
    for (v, b) in synth.truth.merchant_block.iter().enumerate() {
        if let Some(b) = b {
            writeln!(w, "{}\tmerchant\t{b}", labels.merchants()[v]).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    files.insert("blocks", blocks_path.display().to_string());

    let conf_path = path("generate.conf");
    fs::write(&conf_path, config.to_pairs_text()).map_err(io)?;
    files.insert("config", conf_path.display().to_string());

    let out = GenerateOutput {
        users: synth.graph.n_users(),
        merchants: synth.graph.n_merchants(),
        edges: synth.graph.edge_count(),
        fraud_users: synth.truth.fraud_users.len(),
        fraud_merchants: synth.truth.fraud_merchants.len(),
        block_edges: synth.block_edges.clone(),
        files,
        config,
    };
    write_json(&out, stdout)
}

/// Reads `path` into a [`BufReader`]; handy for callers embedding the CLI.
pub fn open_reader(path: &Path) -> std::io::Result<BufReader<File>> {
    File::open(path).map(BufReader::new)
}
