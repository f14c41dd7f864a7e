//! `hyperobs` — generate hypergraph topologies, decide local weak
//! observability, search for minimum observable node sets, and export
//! figure-ready data.
//!
//! Machine output (JSON/CSV) goes to stdout or `--output`; human summaries
//! go to stderr. Exit codes: 0 success / observable, 1 definite negative
//! verdict, 2 usage or guard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hyperobs::observability::RankOptions;
use hyperobs::{
    check_proposition15, exhaustive_mon, greedy_mon, monotonicity_experiment, sensor_matrix,
    simulate, vector_field, verdict_for_sensors, Caps, Error, ExperimentReport, Hypergraph,
    ObsOptions, SensorSet, TopologyFamily,
};

#[derive(Parser)]
#[command(
    name = "hyperobs",
    version,
    about = "Observability of hypergraph dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a canonical topology and write its JSON document.
    Generate(GenerateArgs),
    /// Decide local weak observability for a sensor set.
    Observable(ObservableArgs),
    /// Search for a minimum observable node set.
    Mon(MonArgs),
    /// Compare a hypergraph with its maximal-cardinality restriction.
    Prop15(Prop15Args),
    /// Greedy MON sizes across families and 3-way edge densities.
    Figure2(Figure2Args),
    /// Integrate the induced dynamics and export the trajectory as CSV.
    Simulate(SimulateArgs),
}

/// Where the hypergraph comes from: a JSON file or generator parameters.
#[derive(Args)]
struct GraphSource {
    /// JSON hypergraph document ({"n": .., "edges": [[..], ..]}).
    #[arg(long, conflicts_with_all = ["family", "n", "k"])]
    input: Option<PathBuf>,
    /// Topology family: chain | ring | star | complete.
    #[arg(long, requires = "n", requires = "k")]
    family: Option<String>,
    /// Node count for the generator.
    #[arg(long)]
    n: Option<usize>,
    /// Edge cardinality for the generator.
    #[arg(long)]
    k: Option<usize>,
}

impl GraphSource {
    fn load(&self) -> Result<Hypergraph, Error> {
        match (&self.input, &self.family) {
            (Some(path), None) => Hypergraph::read_json(path),
            (None, Some(family)) => {
                let family: TopologyFamily = family.parse()?;
                let n = self.n.ok_or_else(|| missing("--n"))?;
                let k = self.k.ok_or_else(|| missing("--k"))?;
                family.generate(n, k)
            }
            (None, None) => Err(missing("--input or --family/--n/--k")),
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        }
    }
}

fn missing(what: &str) -> Error {
    Error::InvalidInput(format!("{what} is required"))
}

/// Rank-test knobs shared by the verdict-producing commands.
#[derive(Args)]
struct RankArgs {
    /// Lie-derivative depth; defaults to the state dimension.
    #[arg(long)]
    depth: Option<usize>,
    /// Random evaluation points per prime.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Comma-separated field primes; defaults to three primes near 2^61.
    #[arg(long, value_delimiter = ',')]
    primes: Vec<u64>,
    /// Seed for all randomness; sub-seeds derive deterministically.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Decide by exact symbolic rank instead of random points (n <= 3).
    #[arg(long)]
    exact: bool,
}

impl RankArgs {
    fn to_options(&self) -> ObsOptions {
        let mut rank = RankOptions {
            points_per_prime: self.trials,
            seed: self.seed,
            ..Default::default()
        };
        if !self.primes.is_empty() {
            rank.primes = self.primes.clone();
        }
        ObsOptions {
            depth: self.depth,
            rank,
            caps: Caps::from_env(),
            exact: self.exact,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ObservableArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Comma-separated sensor node ids (1-based).
    #[arg(long, value_delimiter = ',', required = true)]
    sensors: Vec<usize>,
    #[command(flatten)]
    rank: RankArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MonArgs {
    #[command(flatten)]
    source: GraphSource,
    /// greedy | exhaustive
    #[arg(long, default_value = "greedy")]
    method: String,
    /// Largest sensor-set size the exhaustive search may try.
    #[arg(long)]
    max_size: Option<usize>,
    #[command(flatten)]
    rank: RankArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Prop15Args {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_delimiter = ',', required = true)]
    sensors: Vec<usize>,
    #[command(flatten)]
    rank: RankArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Figure2Args {
    /// Node count for every family.
    #[arg(long)]
    n: usize,
    /// Subset of families to run.
    #[arg(long, value_delimiter = ',', default_values = ["chain", "ring", "star", "complete"])]
    families: Vec<String>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    #[command(flatten)]
    rank: RankArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Comma-separated initial state.
    #[arg(long, value_delimiter = ',', required = true)]
    x0: Vec<f64>,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate(args) => {
            let family: TopologyFamily = args.family.parse()?;
            let g = family.generate(args.n, args.k)?;
            emit(&args.output, &g.to_json_string())?;
            eprintln!(
                "generated {} on {} nodes: {} edges, K = {}",
                family.name(),
                args.n,
                g.edge_count(),
                g.max_cardinality()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Observable(args) => {
            let g = args.source.load()?;
            let sensors = SensorSet::new(args.sensors.iter().copied());
            let opts = args.rank.to_options();
            let verdict = verdict_for_sensors(&g, &sensors, &opts)?;
            let json = verdict.to_json(&sensors);
            emit(&args.output, &pretty(&json)?)?;
            eprintln!(
                "{}: rank {} of {} at depth r = {} (failure bound {})",
                if verdict.observable {
                    "observable"
                } else {
                    "NOT observable"
                },
                verdict.certificate.rank,
                g.node_count(),
                verdict.r_used,
                approx_bound(&verdict.certificate.failure_bound),
            );
            Ok(if verdict.observable {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Mon(args) => {
            let g = args.source.load()?;
            let opts = args.rank.to_options();
            let report = match args.method.as_str() {
                "greedy" => greedy_mon(&g, &opts)?,
                "exhaustive" => exhaustive_mon(&g, args.max_size.unwrap_or(g.node_count()), &opts)?,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown method '{other}' (greedy|exhaustive)"
                    )))
                }
            };
            emit(&args.output, &pretty(&report.to_json())?)?;
            eprintln!(
                "{:?} MON of size {}: sensors {}",
                report.method, report.size, report.sensors
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Prop15(args) => {
            let g = args.source.load()?;
            let sensors = SensorSet::new(args.sensors.iter().copied());
            let c = sensor_matrix(&sensors, g.node_count())?;
            let opts = args.rank.to_options();
            let report = check_proposition15(&g, &c, &opts)?;
            let json = Prop15Json {
                n: g.node_count(),
                sensors: sensors.to_vec(),
                max_cardinality: report.max_cardinality,
                restricted_observable: report.restricted.observable,
                restricted_rank: report.restricted.certificate.rank,
                full_observable: report.full.observable,
                full_rank: report.full.certificate.rank,
                implication_holds: report.implication_holds,
                seed: args.rank.seed,
            };
            emit(&args.output, &pretty(&json)?)?;
            if report.implication_holds {
                eprintln!(
                    "implication holds: restricted {} => full {}",
                    report.restricted.observable, report.full.observable
                );
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("IMPLICATION VIOLATED — this should never happen; please report");
                Ok(ExitCode::from(1))
            }
        }
        Command::Figure2(args) => {
            let opts = args.rank.to_options();
            let mut reports = Vec::new();
            for name in &args.families {
                let family: TopologyFamily = name.parse()?;
                reports.push(monotonicity_experiment(family, args.n, &opts)?);
            }
            let text = match args.format.as_str() {
                "csv" => {
                    let mut s = ExperimentReport::csv_header(args.rank.seed);
                    for r in &reports {
                        s.push_str(&r.to_csv_rows());
                    }
                    s
                }
                "json" => pretty(&Figure2Json {
                    n: args.n,
                    seed: args.rank.seed,
                    reports: &reports,
                })?,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown format '{other}' (csv|json)"
                    )))
                }
            };
            emit(&args.output, &text)?;
            for r in &reports {
                let sizes: Vec<String> = r
                    .columns
                    .iter()
                    .map(|c| {
                        c.mon
                            .as_ref()
                            .map(|m| m.size.to_string())
                            .unwrap_or_else(|| "-".into())
                    })
                    .collect();
                eprintln!("{} n={}: MON sizes {}", r.family, r.n, sizes.join(" / "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            let g = args.source.load()?;
            let f = vector_field(&g).to_f64();
            let traj = simulate(&f, &args.x0, args.dt, args.steps)?;
            emit(&args.output, &traj.to_csv_string())?;
            eprintln!(
                "integrated {} steps of dt = {} from {:?}",
                args.steps, args.dt, args.x0
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct Prop15Json {
    n: usize,
    sensors: Vec<usize>,
    max_cardinality: usize,
    restricted_observable: bool,
    restricted_rank: usize,
    full_observable: bool,
    full_rank: usize,
    implication_holds: bool,
    seed: u64,
}

#[derive(Serialize)]
struct Figure2Json<'a> {
    n: usize,
    seed: u64,
    reports: &'a [ExperimentReport],
}

/// Short decimal approximation of an exact probability bound.
fn approx_bound(bound: &hyperobs::Rat) -> String {
    use num_traits::{ToPrimitive, Zero};
    if bound.is_zero() {
        return "0 (exact)".into();
    }
    match bound.to_f64() {
        Some(v) if v > 0.0 => format!("~{v:.2e}"),
        _ => "< 1e-300".into(),
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}
