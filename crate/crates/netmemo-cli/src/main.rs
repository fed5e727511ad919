//! netmemo: memory-assisted compression and network gain experiments.
//!
//! Exit codes: 0 success, 2 usage error, 3 data/format error,
//! 4 memory synchronization mismatch.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use netmemo::ctw::{ctw_decode, ctw_encode_opts, CtwOptions, DEFAULT_DEPTH};
use netmemo::error::Error;
use netmemo::flowsim::{
    fppc, network_gain, pair_records, pair_records_to_csv, plain_routing_gain,
    single_path_gain, Gain, MemoryDeployment,
};
use netmemo::gainbench::{gain_curve, reports_to_csv, BenchConfig, GainInput, MarkovSource};
use netmemo::graph::Graph;
use netmemo::lzdict::{lz_decode, lz_encode, DEFAULT_WINDOW};
use netmemo::rplg::{
    build_weights, graph_to_edge_list, sample_graph, solve_core_threshold, topk_core,
    weights_to_sidecar,
};
use netmemo::stream::{Algorithm, CodedStream};

const VERSION: &str = concat!("netmemo ", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(name = "netmemo", version, about = "Memory-assisted compression and network gain experiments")]
struct Cli {
    /// Worker threads (falls back to NETMEMO_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file, optionally against a shared memory file.
    Compress(CompressArgs),
    /// Decompress a coded stream produced by `compress`.
    Decompress(DecompressArgs),
    /// Measure the memorization gain g(n, m) over a grid of n and m.
    BenchGain(BenchGainArgs),
    /// Sample a random power-law graph and write its edge list.
    GenGraph(GenGraphArgs),
    /// Deploy memories on RPLGs and measure the network-wide gain G(g).
    Simulate(SimulateArgs),
    /// Fraction of shortest paths passing through the high-degree core.
    Fppc(FppcArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Codec {
    Ctw,
    Lz,
    Both,
}

#[derive(Args)]
struct CompressArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Shared memory file (must be identical on the decompressing side).
    #[arg(long)]
    memory: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ctw")]
    algo: CodecOne,
    /// CTW context depth in bits.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// LZ window size in bytes (multiple of 256).
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodecOne {
    Ctw,
    Lz,
}

#[derive(Args)]
struct DecompressArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    memory: Option<PathBuf>,
}

#[derive(Args)]
struct BenchGainArgs {
    #[arg(long, value_enum, default_value = "both")]
    codec: Codec,
    /// Source spec: iid:P1 | order1:P(1|0),P(1|1) | corpus:FILE
    #[arg(long, default_value = "order1:0.1,0.9")]
    source: String,
    /// Target lengths in bytes, comma separated.
    #[arg(long, default_value = "100,1024,10240,102400", value_delimiter = ',')]
    n_grid: Vec<usize>,
    /// Memory lengths in bytes, comma separated.
    #[arg(long, default_value = "0,65536,1048576,4194304", value_delimiter = ',')]
    m_grid: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 2.5)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    w_bar: f64,
    /// Maximum expected degree (default sqrt(N * w_bar)).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write expected weights next to the edge list.
    #[arg(long)]
    weights_out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 2.5)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    w_bar: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Single-link gain, a decimal such as 3 or 1.5.
    #[arg(long, default_value = "3")]
    g: String,
    /// Core selection: topk:FRACTION or theorem.
    #[arg(long, default_value = "topk:0.025")]
    core: String,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Write per-pair flows of the first seed as CSV.
    #[arg(long)]
    pairs_csv: Option<PathBuf>,
    /// Output JSON path (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FppcArgs {
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 2.5)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    w_bar: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value = "topk:0.02")]
    core: String,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli
        .threads
        .or_else(|| std::env::var("NETMEMO_THREADS").ok()?.parse().ok())
    {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("netmemo: warning: thread pool already initialized");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("netmemo: {err}");
            ExitCode::from(match err {
                Error::Usage(_) => 2,
                Error::Synchronization { .. } => 4,
                _ => 3,
            })
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Compress(args) => cmd_compress(args),
        Command::Decompress(args) => cmd_decompress(args),
        Command::BenchGain(args) => cmd_bench_gain(args),
        Command::GenGraph(args) => cmd_gen_graph(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fppc(args) => cmd_fppc(args),
    }
}

fn read_memory(path: &Option<PathBuf>) -> Result<Vec<u8>, Error> {
    match path {
        Some(p) => Ok(fs::read(p)?),
        None => Ok(Vec::new()),
    }
}

fn cmd_compress(args: CompressArgs) -> Result<(), Error> {
    let input = fs::read(&args.input)?;
    let memory = read_memory(&args.memory)?;
    let stream = match args.algo {
        CodecOne::Ctw => ctw_encode_opts(
            &input,
            &memory,
            CtwOptions { depth: args.depth, adapt: true },
        )?,
        CodecOne::Lz => lz_encode(&input, &memory, args.window)?,
    };
    let bytes = stream.to_bytes();
    fs::write(&args.output, &bytes)?;
    let ratio = if bytes.is_empty() {
        0.0
    } else {
        input.len() as f64 / bytes.len() as f64
    };
    println!(
        "{} -> {}: {} -> {} bytes (ratio {ratio:.3}, memory {} bytes)",
        args.input.display(),
        args.output.display(),
        input.len(),
        bytes.len(),
        memory.len()
    );
    Ok(())
}

fn cmd_decompress(args: DecompressArgs) -> Result<(), Error> {
    let bytes = fs::read(&args.input)?;
    let memory = read_memory(&args.memory)?;
    let stream = CodedStream::from_bytes(&bytes)?;
    let output = match stream.algorithm {
        Algorithm::Ctw => ctw_decode(&stream, &memory)?,
        Algorithm::Lz => lz_decode(&stream, &memory)?,
    };
    fs::write(&args.output, &output)?;
    println!(
        "{} -> {}: {} -> {} bytes ({})",
        args.input.display(),
        args.output.display(),
        bytes.len(),
        output.len(),
        stream.algorithm.name()
    );
    Ok(())
}

fn parse_source(spec: &str) -> Result<SourceSpec, Error> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::usage(format!("bad source spec '{spec}'")))?;
    let parse_p = |s: &str| -> Result<f64, Error> {
        s.parse()
            .map_err(|_| Error::usage(format!("bad probability '{s}'")))
    };
    match kind {
        "iid" => Ok(SourceSpec::Source(MarkovSource::iid(parse_p(rest)?)?)),
        "order1" => {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| Error::usage("order1 needs P(1|0),P(1|1)"))?;
            Ok(SourceSpec::Source(MarkovSource::order1(
                parse_p(a)?,
                parse_p(b)?,
            )?))
        }
        "corpus" => Ok(SourceSpec::Corpus(fs::read(rest)?)),
        other => Err(Error::usage(format!("unknown source kind '{other}'"))),
    }
}

enum SourceSpec {
    Source(MarkovSource),
    Corpus(Vec<u8>),
}

fn cmd_bench_gain(args: BenchGainArgs) -> Result<(), Error> {
    let spec = parse_source(&args.source)?;
    let input = match &spec {
        SourceSpec::Source(s) => GainInput::Source(s),
        SourceSpec::Corpus(c) => GainInput::Corpus(c),
    };
    let codecs: &[Algorithm] = match args.codec {
        Codec::Ctw => &[Algorithm::Ctw],
        Codec::Lz => &[Algorithm::Lz],
        Codec::Both => &[Algorithm::Ctw, Algorithm::Lz],
    };
    let mut reports = Vec::new();
    for &codec in codecs {
        let base = BenchConfig {
            codec,
            depth: args.depth,
            window_size: args.window,
            trials: args.trials,
            seed: args.seed,
            ..Default::default()
        };
        reports.extend(gain_curve(&input, &base, &args.n_grid, &args.m_grid)?);
    }
    let mut out = format!(
        "# {VERSION}\n# source={} trials={} seed={} depth={} window={}\n",
        args.source, args.trials, args.seed, args.depth, args.window
    );
    out.push_str(&reports_to_csv(&reports));
    emit(&args.output, &out)
}

fn default_delta(n: usize, w_bar: f64, delta: Option<f64>) -> f64 {
    delta.unwrap_or_else(|| (n as f64 * w_bar).sqrt())
}

fn cmd_gen_graph(args: GenGraphArgs) -> Result<(), Error> {
    let delta = default_delta(args.n, args.w_bar, args.delta);
    let seq = build_weights(args.n, args.beta, args.w_bar, delta)?;
    let graph = sample_graph(&seq, args.seed);
    fs::write(&args.output, graph_to_edge_list(&graph))?;
    if let Some(path) = &args.weights_out {
        fs::write(path, weights_to_sidecar(&graph))?;
    }
    println!(
        "wrote {} ({} nodes, {} edges, giant {})",
        args.output.display(),
        graph.n(),
        graph.graph.edge_count(),
        graph.giant_component().len()
    );
    Ok(())
}

/// Giant component of a fresh RPLG sample plus the expected weights of the
/// surviving nodes.
fn sample_giant(
    n: usize,
    beta: f64,
    w_bar: f64,
    delta: f64,
    seed: u64,
) -> Result<(Graph, Vec<f64>), Error> {
    let seq = build_weights(n, beta, w_bar, delta)?;
    let sample = sample_graph(&seq, seed);
    let nodes = sample.giant_component();
    let (graph, _) = sample.graph.induced(&nodes);
    let weights = nodes
        .iter()
        .map(|&v| sample.weights[v as usize])
        .collect();
    Ok((graph, weights))
}

enum CoreMode {
    TopK(f64),
    Theorem,
}

fn parse_core(spec: &str) -> Result<CoreMode, Error> {
    if spec == "theorem" {
        return Ok(CoreMode::Theorem);
    }
    if let Some(frac) = spec.strip_prefix("topk:") {
        let f: f64 = frac
            .parse()
            .map_err(|_| Error::usage(format!("bad core fraction '{frac}'")))?;
        return Ok(CoreMode::TopK(f));
    }
    Err(Error::usage(format!(
        "core must be 'theorem' or 'topk:FRACTION', got '{spec}'"
    )))
}

fn select_core(
    mode: &CoreMode,
    graph: &Graph,
    weights: &[f64],
    beta: f64,
    w_bar: f64,
) -> Result<(Vec<u32>, bool), Error> {
    match mode {
        CoreMode::TopK(f) => Ok((topk_core(graph, *f)?.nodes, false)),
        CoreMode::Theorem => {
            let threshold = solve_core_threshold(beta, w_bar)?;
            let spec = theorem_core_from_weights(weights, threshold.l);
            Ok((spec, threshold.degenerate))
        }
    }
}

fn theorem_core_from_weights(weights: &[f64], l: f64) -> Vec<u32> {
    let w_min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    (0..weights.len() as u32)
        .filter(|&v| weights[v as usize] > l * w_min)
        .collect()
}

#[derive(Serialize)]
struct SeedResult {
    seed: u64,
    giant_size: usize,
    core_size: usize,
    g_network: f64,
    g_plain_routing: f64,
    fppc: f64,
}

#[derive(Serialize)]
struct SimulateSummary {
    version: String,
    n: usize,
    beta: f64,
    w_bar: f64,
    delta: f64,
    g: f64,
    core_mode: String,
    seeds: usize,
    seed_base: u64,
    single_path_cap: f64,
    per_seed: Vec<SeedResult>,
    mean_g_network: f64,
    mean_g_plain_routing: f64,
    mean_fppc: f64,
    degenerate_core: bool,
    runtime_ms: u128,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let start = Instant::now();
    let gain = Gain::parse(&args.g)?;
    let mode = parse_core(&args.core)?;
    let delta = default_delta(args.n, args.w_bar, args.delta);
    if args.seeds == 0 {
        return Err(Error::usage("seeds must be at least 1"));
    }
    let mut per_seed = Vec::new();
    let mut degenerate = false;
    for i in 0..args.seeds {
        let seed = args.seed_base + i as u64;
        let (graph, weights) = sample_giant(args.n, args.beta, args.w_bar, delta, seed)?;
        let (core, degen) = select_core(&mode, &graph, &weights, args.beta, args.w_bar)?;
        degenerate |= degen;
        let dep = MemoryDeployment::new(core.clone(), gain);
        let ng = network_gain(&graph, &dep);
        let plain = plain_routing_gain(&graph, &dep);
        let f = fppc(&graph, &core);
        if i == 0 {
            if let Some(path) = &args.pairs_csv {
                fs::write(path, pair_records_to_csv(&pair_records(&graph, &dep)))?;
            }
        }
        per_seed.push(SeedResult {
            seed,
            giant_size: graph.n(),
            core_size: core.len(),
            g_network: ng.value(),
            g_plain_routing: plain.value(),
            fppc: f,
        });
    }
    if degenerate {
        eprintln!(
            "netmemo: warning: theorem core threshold is degenerate (l <= 1); \
             the prescription places memory everywhere"
        );
    }
    let k = per_seed.len() as f64;
    let summary = SimulateSummary {
        version: VERSION.into(),
        n: args.n,
        beta: args.beta,
        w_bar: args.w_bar,
        delta,
        g: gain.as_f64(),
        core_mode: args.core.clone(),
        seeds: args.seeds,
        seed_base: args.seed_base,
        single_path_cap: single_path_gain(&gain),
        mean_g_network: per_seed.iter().map(|r| r.g_network).sum::<f64>() / k,
        mean_g_plain_routing: per_seed.iter().map(|r| r.g_plain_routing).sum::<f64>() / k,
        mean_fppc: per_seed.iter().map(|r| r.fppc).sum::<f64>() / k,
        per_seed,
        degenerate_core: degenerate,
        runtime_ms: start.elapsed().as_millis(),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::format(format!("summary serialization: {e}")))?;
    emit(&args.output, &(json + "\n"))
}

#[derive(Serialize)]
struct FppcSummary {
    version: String,
    n: usize,
    beta: f64,
    w_bar: f64,
    delta: f64,
    core_mode: String,
    seeds: usize,
    seed_base: u64,
    per_seed: Vec<FppcSeed>,
    mean_fppc: f64,
    runtime_ms: u128,
}

#[derive(Serialize)]
struct FppcSeed {
    seed: u64,
    giant_size: usize,
    core_size: usize,
    fppc: f64,
}

fn cmd_fppc(args: FppcArgs) -> Result<(), Error> {
    let start = Instant::now();
    let mode = parse_core(&args.core)?;
    let delta = default_delta(args.n, args.w_bar, args.delta);
    if args.seeds == 0 {
        return Err(Error::usage("seeds must be at least 1"));
    }
    let mut per_seed = Vec::new();
    for i in 0..args.seeds {
        let seed = args.seed_base + i as u64;
        let (graph, weights) = sample_giant(args.n, args.beta, args.w_bar, delta, seed)?;
        let (core, _) = select_core(&mode, &graph, &weights, args.beta, args.w_bar)?;
        per_seed.push(FppcSeed {
            seed,
            giant_size: graph.n(),
            core_size: core.len(),
            fppc: fppc(&graph, &core),
        });
    }
    let mean = per_seed.iter().map(|r| r.fppc).sum::<f64>() / per_seed.len() as f64;
    let summary = FppcSummary {
        version: VERSION.into(),
        n: args.n,
        beta: args.beta,
        w_bar: args.w_bar,
        delta,
        core_mode: args.core.clone(),
        seeds: args.seeds,
        seed_base: args.seed_base,
        per_seed,
        mean_fppc: mean,
        runtime_ms: start.elapsed().as_millis(),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::format(format!("summary serialization: {e}")))?;
    emit(&args.output, &(json + "\n"))
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            fs::write(p, content)?;
            println!("wrote {}", p.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
