//! `fsp` — command-line front end for the finite-state prediction toolkit.
//!
//! Subcommands cover the full pipeline: enumerating the K-state machine
//! space, running the weighted pool and the mean-field network over
//! sequences, comparing the two side by side (single sequences or full
//! sweeps), profiling the complexity of periodic patterns, and generating
//! input sequences. JSON outputs embed their resolved configuration and use
//! sorted keys; displayed symbols and states are 1-based; exact rationals
//! are rendered as "p/q".
//!
//! Exit codes: 0 success; 1 usage or configuration errors (including guard
//! limits); 2 when `compare --expect agree` finds a prediction divergence.

mod files;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use files::{MachineFile, SpecFile};
use fsp_core::{
    best_expert, compare, generate, mistake_bound, normalize, parse_sequence_text, profile, sweep,
    Alphabet, GeneratorSpec, MeanFieldNetwork, NetworkState, PredictorIndex, PredictorSpace,
    RatioSpec, RunTrace, Scalar, Symbol, Verdict, WeightedPool,
};
use num_rational::BigRational;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "fsp",
    version,
    about = "Finite-state prediction: pools, networks, and their equivalence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the K-state machine space, or convert between a machine and
    /// its canonical index
    Enumerate(EnumerateArgs),
    /// Run the weighted pool of all K-state machines over a sequence
    Aggregate(AggregateArgs),
    /// Run the K-node mean-field network over a sequence
    Network(NetworkArgs),
    /// Run pool and network side by side and compare them step by step
    Compare(CompareArgs),
    /// Compare pool and network over every sequence of a given length
    Sweep(SweepArgs),
    /// Best asymptotic error rate per machine size for a periodic pattern
    Profile(ProfileArgs),
    /// Generate input sequences
    Generate(GenerateArgs),
}

/// Arithmetic used for weights: exact rationals or 64-bit floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

impl Mode {
    fn as_str(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expectation {
    /// Exit with code 2 if any step's predictions disagree
    Agree,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SequenceInput {
    /// Inline sequence, e.g. "a1a2a1" (spaces and commas allowed)
    #[arg(long)]
    sequence: Option<String>,
    /// File containing the sequence in the same text form
    #[arg(long)]
    sequence_file: Option<PathBuf>,
}

impl SequenceInput {
    fn resolve(&self, alphabet: Alphabet) -> Result<Vec<Symbol>, String> {
        let text = match (&self.sequence, &self.sequence_file) {
            (Some(text), None) => text.clone(),
            (None, Some(path)) => read_text(path)?,
            _ => unreachable!("clap enforces exactly one source"),
        };
        let symbols = parse_sequence_text(&text).map_err(|e| e.to_string())?;
        alphabet.check_all(&symbols).map_err(|e| e.to_string())?;
        Ok(symbols)
    }
}

#[derive(Args)]
struct EnumerateArgs {
    /// Number of machine states
    #[arg(long)]
    k: usize,
    /// Alphabet size
    #[arg(long)]
    alphabet: usize,
    /// Decode this index into its machine
    #[arg(long)]
    index: Option<u128>,
    /// Encode the machine in this JSON file into its index
    #[arg(long, conflicts_with = "index")]
    machine: Option<PathBuf>,
    /// Write the output here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alphabet: usize,
    /// Reward factor for correct predictions, e.g. "2" or "3/2"
    #[arg(long, default_value = "2")]
    lambda: String,
    #[command(flatten)]
    input: SequenceInput,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Record the per-symbol weight masses before every step
    #[arg(long)]
    snapshots: bool,
    /// Also search for the best single machine and report the loss bound
    #[arg(long)]
    bound: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alphabet: usize,
    #[arg(long, default_value = "2")]
    lambda: String,
    #[command(flatten)]
    input: SequenceInput,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Record the full weight state after every observation
    #[arg(long)]
    trace_weights: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alphabet: usize,
    #[arg(long, default_value = "2")]
    lambda: String,
    #[command(flatten)]
    input: SequenceInput,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// With "agree": exit 2 if the predictions ever part ways
    #[arg(long, value_enum)]
    expect: Option<Expectation>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alphabet: usize,
    #[arg(long, default_value = "2")]
    lambda: String,
    /// Compare every sequence of exactly this length
    #[arg(long)]
    max_length: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Periodic pattern, e.g. "a1a1a2"
    #[arg(long)]
    pattern: String,
    /// Alphabet size (default: the largest symbol in the pattern)
    #[arg(long)]
    alphabet: Option<usize>,
    /// Largest machine size to profile
    #[arg(long)]
    k_max: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct GenerateSource {
    /// Repeat this pattern, e.g. "a1a1a2"
    #[arg(long)]
    periodic: Option<String>,
    /// Independent uniform symbols from --seed
    #[arg(long)]
    iid: bool,
    /// Drive the machine in this JSON file with seeded symbols and emit its
    /// predictions
    #[arg(long)]
    automaton: Option<PathBuf>,
    /// Emit input 1 or 2 of the two-block lookback demonstration
    #[arg(long, value_name = "VARIANT")]
    gated_demo: Option<u8>,
    /// Read a full generator description from this JSON file
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: GenerateSource,
    /// Alphabet size (iid only)
    #[arg(long)]
    alphabet: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output length (periodic, iid, automaton)
    #[arg(long)]
    length: Option<usize>,
    /// Gate length for --gated-demo
    #[arg(long, default_value_t = 5)]
    gate_len: usize,
    /// Emit JSON with the resolved generator instead of plain text
    #[arg(long)]
    json: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Enumerate(args) => run_enumerate(&args),
        Command::Aggregate(args) => match args.mode {
            Mode::Exact => run_aggregate::<BigRational>(&args),
            Mode::Float => run_aggregate::<f64>(&args),
        },
        Command::Network(args) => match args.mode {
            Mode::Exact => run_network::<BigRational>(&args),
            Mode::Float => run_network::<f64>(&args),
        },
        Command::Compare(args) => match args.mode {
            Mode::Exact => run_compare::<BigRational>(&args),
            Mode::Float => run_compare::<f64>(&args),
        },
        Command::Sweep(args) => match args.mode {
            Mode::Exact => run_sweep::<BigRational>(&args),
            Mode::Float => run_sweep::<f64>(&args),
        },
        Command::Profile(args) => run_profile(&args),
        Command::Generate(args) => run_generate(&args),
    }
}

// ---------------------------------------------------------------- helpers

fn read_text(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn write_output(text: &str, output: Option<&PathBuf>) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(value: &Value, output: Option<&PathBuf>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    write_output(&text, output)
}

fn parse_lambda(text: &str) -> Result<RatioSpec, String> {
    RatioSpec::parse(text).map_err(|e| e.to_string())
}

fn alphabet_of(size: usize) -> Result<Alphabet, String> {
    Alphabet::new(size).map_err(|e| e.to_string())
}

/// JSON for counts and indices that may exceed what a JSON number holds
/// losslessly: a number up to u64, a decimal string beyond.
fn big_uint_json(value: u128) -> Value {
    if value <= u64::MAX as u128 {
        json!(value as u64)
    } else {
        json!(value.to_string())
    }
}

fn one_based_seq(seq: &[Symbol]) -> Vec<usize> {
    seq.iter().map(|&s| s + 1).collect()
}

fn trace_json(trace: &RunTrace) -> Value {
    json!(trace
        .steps
        .iter()
        .map(|s| {
            json!({
                "t": s.t,
                "predicted": s.predicted + 1,
                "observed": s.observed + 1,
                "loss": s.loss,
            })
        })
        .collect::<Vec<_>>())
}

fn network_state_json(state: &NetworkState) -> Value {
    json!({
        "w_active": state.w_active,
        "w_trans": state.w_trans,
    })
}

// ------------------------------------------------------------- enumerate

fn run_enumerate(args: &EnumerateArgs) -> Result<i32, String> {
    let alphabet = alphabet_of(args.alphabet)?;
    let space = PredictorSpace::new(args.k, alphabet).map_err(|e| e.to_string())?;
    let config = json!({ "k": args.k, "alphabet": args.alphabet });
    let mut value = json!({
        "config": config,
        "count": big_uint_json(space.count()),
    });

    if let Some(index) = args.index {
        let machine = space
            .decode(PredictorIndex(index))
            .map_err(|e| e.to_string())?;
        let object = value.as_object_mut().expect("top level is an object");
        object.insert("index".to_string(), big_uint_json(index));
        object.insert(
            "machine".to_string(),
            serde_json::to_value(MachineFile::from_core(&machine)).map_err(|e| e.to_string())?,
        );
    } else if let Some(path) = &args.machine {
        let text = read_text(path)?;
        let file: MachineFile = serde_json::from_str(&text)
            .map_err(|e| format!("malformed machine file {}: {e}", path.display()))?;
        let machine = file.to_core()?;
        let index = space.encode(&machine).map_err(|e| e.to_string())?;
        let object = value.as_object_mut().expect("top level is an object");
        object.insert("index".to_string(), big_uint_json(index.0));
        object.insert(
            "machine".to_string(),
            serde_json::to_value(MachineFile::from_core(&machine)).map_err(|e| e.to_string())?,
        );
    }

    emit_json(&value, args.output.as_ref())?;
    Ok(0)
}

// ------------------------------------------------------------- aggregate

fn run_aggregate<S: Scalar>(args: &AggregateArgs) -> Result<i32, String> {
    let alphabet = alphabet_of(args.alphabet)?;
    let lambda = parse_lambda(&args.lambda)?;
    let sequence = args.input.resolve(alphabet)?;
    let mut pool =
        WeightedPool::<S>::full_space(args.k, alphabet, lambda).map_err(|e| e.to_string())?;
    let members = pool.len();
    let (trace, snapshots) = pool
        .run_aggregator(&sequence, args.snapshots)
        .map_err(|e| e.to_string())?;

    let bound = if args.bound {
        let (best_loss, best_index) =
            best_expert(args.k, alphabet, &sequence).map_err(|e| e.to_string())?;
        let bound =
            mistake_bound(members as u128, best_loss, lambda).map_err(|e| e.to_string())?;
        json!({
            "best_loss": best_loss,
            "best_index": big_uint_json(best_index.0),
            "c1": bound.c1,
            "c2": bound.c2,
            "bound": bound.bound,
            "holds": (trace.cumulative_loss as f64) <= bound.bound,
        })
    } else {
        Value::Null
    };

    let value = json!({
        "config": {
            "k": args.k,
            "alphabet": args.alphabet,
            "lambda": lambda.to_string(),
            "mode": args.mode.as_str(),
            "sequence": one_based_seq(&sequence),
        },
        "members": members,
        "mistakes": trace.cumulative_loss,
        "steps": trace_json(&trace),
        "masses": snapshots.map(|snaps| {
            json!(snaps
                .iter()
                .map(|s| json!({ "t": s.t, "masses": s.masses }))
                .collect::<Vec<_>>())
        }),
        "bound": bound,
    });
    emit_json(&value, args.output.as_ref())?;
    Ok(0)
}

// --------------------------------------------------------------- network

fn run_network<S: Scalar>(args: &NetworkArgs) -> Result<i32, String> {
    let alphabet = alphabet_of(args.alphabet)?;
    let lambda = parse_lambda(&args.lambda)?;
    let sequence = args.input.resolve(alphabet)?;
    let mut network = MeanFieldNetwork::<S>::init_uniform(args.k, alphabet, lambda)
        .map_err(|e| e.to_string())?;

    let mut per_step = args.trace_weights.then(Vec::new);
    if let Some(states) = per_step.as_mut() {
        states.push(network.dump());
    }
    let mut trace = RunTrace::new();
    for (i, &symbol) in sequence.iter().enumerate() {
        trace.push(i + 1, network.predict(), symbol);
        network.observe(symbol).map_err(|e| e.to_string())?;
        if let Some(states) = per_step.as_mut() {
            states.push(network.dump());
        }
    }
    let final_scores = normalize(&network.predict_scores()).map_err(|e| e.to_string())?;

    let value = json!({
        "config": {
            "k": args.k,
            "alphabet": args.alphabet,
            "lambda": lambda.to_string(),
            "mode": args.mode.as_str(),
            "sequence": one_based_seq(&sequence),
        },
        "mistakes": trace.cumulative_loss,
        "steps": trace_json(&trace),
        "final": network_state_json(&network.dump()),
        "final_scores": final_scores.iter().map(Scalar::display).collect::<Vec<_>>(),
        "weights_per_step": per_step.map(|states| {
            json!(states.iter().map(network_state_json).collect::<Vec<_>>())
        }),
    });
    emit_json(&value, args.output.as_ref())?;
    Ok(0)
}

// --------------------------------------------------------------- compare

fn run_compare<S: Scalar>(args: &CompareArgs) -> Result<i32, String> {
    let alphabet = alphabet_of(args.alphabet)?;
    let lambda = parse_lambda(&args.lambda)?;
    let sequence = args.input.resolve(alphabet)?;
    let report =
        compare::<S>(args.k, alphabet, lambda, &sequence).map_err(|e| e.to_string())?;

    let mut value = report.to_json();
    value
        .as_object_mut()
        .expect("report is an object")
        .insert("mode".to_string(), json!(args.mode.as_str()));
    emit_json(&value, args.output.as_ref())?;

    if args.expect == Some(Expectation::Agree) && report.verdict == Verdict::Diverged {
        return Ok(2);
    }
    Ok(0)
}

// ----------------------------------------------------------------- sweep

fn run_sweep<S: Scalar>(args: &SweepArgs) -> Result<i32, String> {
    let alphabet = alphabet_of(args.alphabet)?;
    let lambda = parse_lambda(&args.lambda)?;
    let summary = sweep::<S>(args.k, alphabet, lambda, args.max_length)
        .map_err(|e| e.to_string())?;

    let mut value = summary.to_json();
    value
        .as_object_mut()
        .expect("summary is an object")
        .insert("mode".to_string(), json!(args.mode.as_str()));
    emit_json(&value, args.output.as_ref())?;
    Ok(0)
}

// --------------------------------------------------------------- profile

fn run_profile(args: &ProfileArgs) -> Result<i32, String> {
    let pattern = parse_sequence_text(&args.pattern).map_err(|e| e.to_string())?;
    let implied = pattern.iter().map(|&s| s + 1).max().unwrap_or(0);
    let alphabet = alphabet_of(args.alphabet.unwrap_or(implied))?;
    let curve = profile(&pattern, alphabet, args.k_max).map_err(|e| e.to_string())?;

    let mut text = String::new();
    text.push_str(&format!(
        "# pattern={}\n",
        alphabet.display_sequence(&pattern)
    ));
    text.push_str(&format!("# alphabet={}\n", alphabet.size()));
    text.push_str(&format!("# k_max={}\n", args.k_max));
    text.push_str(&curve.to_csv());
    write_output(&text, args.output.as_ref())?;
    Ok(0)
}

// -------------------------------------------------------------- generate

fn require<T>(value: Option<T>, what: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("{what} is required for this generator"))
}

fn run_generate(args: &GenerateArgs) -> Result<i32, String> {
    let spec_file: SpecFile = if let Some(path) = &args.source.spec {
        let text = read_text(path)?;
        serde_json::from_str(&text)
            .map_err(|e| format!("malformed generator file {}: {e}", path.display()))?
    } else if let Some(pattern) = &args.source.periodic {
        let symbols = parse_sequence_text(pattern).map_err(|e| e.to_string())?;
        SpecFile::Periodic {
            pattern: symbols.iter().map(|&s| s + 1).collect(),
            length: require(args.length, "--length")?,
        }
    } else if args.source.iid {
        SpecFile::Iid {
            alphabet: require(args.alphabet, "--alphabet")?,
            seed: args.seed,
            length: require(args.length, "--length")?,
        }
    } else if let Some(path) = &args.source.automaton {
        let text = read_text(path)?;
        let machine: MachineFile = serde_json::from_str(&text)
            .map_err(|e| format!("malformed machine file {}: {e}", path.display()))?;
        SpecFile::AutomatonFiltered {
            automaton: machine,
            seed: args.seed,
            length: require(args.length, "--length")?,
        }
    } else if let Some(variant) = args.source.gated_demo {
        SpecFile::GatedCompositeDemo {
            gate_len: args.gate_len,
            variant,
        }
    } else {
        unreachable!("clap enforces exactly one source");
    };

    let spec = spec_file.to_core()?;
    let sequence = generate(&spec).map_err(|e| e.to_string())?;
    let alphabet = match &spec {
        GeneratorSpec::Periodic { pattern, .. } => {
            Alphabet::new(pattern.iter().map(|&s| s + 1).max().unwrap_or(1))
                .map_err(|e| e.to_string())?
        }
        GeneratorSpec::Iid { alphabet, .. } => *alphabet,
        GeneratorSpec::AutomatonFiltered { automaton, .. } => automaton.alphabet(),
        GeneratorSpec::GatedCompositeDemo { .. } => Alphabet::new(2).map_err(|e| e.to_string())?,
    };
    let text_form = alphabet.display_sequence(&sequence);

    if args.json {
        let value = json!({
            "config": serde_json::to_value(&spec_file).map_err(|e| e.to_string())?,
            "sequence": one_based_seq(&sequence),
            "text": text_form,
        });
        emit_json(&value, args.output.as_ref())?;
    } else {
        write_output(&format!("{text_form}\n"), args.output.as_ref())?;
    }
    Ok(0)
}
