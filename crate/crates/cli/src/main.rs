use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hll_cli::commands::{self, default_bench_pipelines, parse_points};
use hll_cli::service::DEFAULT_MAX_WORDS;
use hll_cli::{CliError, InputFormat, Server, ServiceConfig};
use hll_core::{HashWidth, ProfileSpec, SketchConfig};

#[derive(Parser)]
#[command(name = "hll", version, about = "HyperLogLog cardinality estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of distinct items in a file (or `-` for stdin).
    Count(CountArgs),
    /// Measure relative error over synthetic streams and emit CSV.
    Profile(ProfileArgs),
    /// Accept ingest frames over TCP and reply with estimates.
    Serve(ServeArgs),
    /// Time aggregation throughput per pipeline count and emit CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    U32le,
    Lines,
}

#[derive(Args)]
struct SketchArgs {
    /// Index bits p; m = 2^p registers.
    #[arg(
        short = 'p',
        long = "precision",
        visible_alias = "p",
        default_value_t = 16
    )]
    precision: u8,
    /// Hash width in bits.
    #[arg(
        long = "hash-bits",
        visible_alias = "hash",
        default_value = "64",
        value_parser = PossibleValuesParser::new(["32", "64"]).map(|s| s.parse::<u32>().unwrap())
    )]
    hash_bits: u32,
    /// Hash seed.
    #[arg(long, default_value_t = 0)]
    seed: u32,
    /// Number of aggregation pipelines k.
    #[arg(short = 'k', long = "pipelines", default_value_t = 1)]
    pipelines: usize,
}

impl SketchArgs {
    fn config(&self) -> Result<SketchConfig, CliError> {
        let config = SketchConfig::from_raw(self.precision, self.hash_bits, self.seed)?;
        if self.pipelines == 0 {
            return Err(CliError::Usage("--pipelines must be at least 1".into()));
        }
        Ok(config)
    }
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    sketch: SketchArgs,
    #[arg(long, value_enum, default_value = "u32le")]
    format: Format,
    /// Input file, `-` for stdin.
    input: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    sketch: SketchArgs,
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: String,
    /// Largest word_count accepted per frame.
    #[arg(long, default_value_t = DEFAULT_MAX_WORDS)]
    max_words: u64,
}

#[derive(Args)]
struct ProfileArgs {
    /// Precisions to profile, comma separated.
    #[arg(short = 'p', long = "precision", visible_alias = "p", value_delimiter = ',', default_values_t = [14u8, 16])]
    precision: Vec<u8>,
    /// Hash widths to profile, comma separated.
    #[arg(long = "hash-bits", visible_alias = "hash", value_delimiter = ',', default_values_t = [32u32, 64])]
    hash_bits: Vec<u32>,
    /// Checkpoints: `LO..HI` (log-spaced) or a comma-separated list.
    #[arg(long, default_value = "1e3..1e8")]
    points: String,
    /// Log-spaced checkpoints per decade for `LO..HI` ranges.
    #[arg(long, default_value_t = 4)]
    per_decade: u32,
    #[arg(long, default_value_t = 10)]
    trials: u32,
    /// Base seed for the synthetic streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    hash_seed: u32,
    /// Directory for points.csv and summary.csv; without it the summary goes
    /// to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ProfileArgs {
    fn spec(&self) -> Result<ProfileSpec, CliError> {
        let widths = self
            .hash_bits
            .iter()
            .map(|&b| HashWidth::from_bits(b))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = ProfileSpec {
            precisions: self.precision.clone(),
            widths,
            checkpoints: parse_points(&self.points, self.per_decade)?,
            trials: self.trials,
            base_seed: self.seed,
            hash_seed: self.hash_seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(
        short = 'p',
        long = "precision",
        visible_alias = "p",
        default_value_t = 16
    )]
    precision: u8,
    #[arg(long = "hash-bits", visible_alias = "hash", default_value_t = 64)]
    hash_bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u32,
    /// Pipeline counts to time; defaults to powers of two up to the core count.
    #[arg(short = 'k', long = "pipelines", value_delimiter = ',')]
    pipelines: Vec<usize>,
    /// Synthetic data volume in MiB (at least 64).
    #[arg(long, default_value_t = 64)]
    volume_mib: u64,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// Output CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Count(args) => {
            let config = args.sketch.config()?;
            let format = match args.format {
                Format::U32le => InputFormat::U32Le,
                Format::Lines => InputFormat::Lines,
            };
            let report = commands::count_path(&args.input, format, config, args.sketch.pipelines)?;
            println!("{}", report.to_json());
        }
        Command::Profile(args) => {
            let spec = args.spec()?;
            let stdout = io::stdout().lock();
            commands::profile(&spec, args.out.as_deref(), stdout)?;
        }
        Command::Serve(args) => {
            let config = ServiceConfig {
                defaults: args.sketch.config()?,
                pipelines: args.sketch.pipelines,
                max_words: args.max_words,
            };
            let server = Server::bind(&args.listen, config)
                .map_err(|e| CliError::io(format!("binding {}", args.listen), e))?;
            let addr = server
                .local_addr()
                .map_err(|e| CliError::io("listener", e))?;
            eprintln!("listening on {addr}");
            server.run().map_err(|e| CliError::io("accept loop", e))?;
        }
        Command::Bench(args) => {
            let config = SketchConfig::from_raw(args.precision, args.hash_bits, args.seed)?;
            let pipelines = if args.pipelines.is_empty() {
                default_bench_pipelines()
            } else {
                args.pipelines
            };
            let volume = args.volume_mib << 20;
            match args.out {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .map_err(|e| CliError::io(path.display().to_string(), e))?;
                    commands::run_bench(config, &pipelines, volume, args.repetitions, file)?;
                }
                None => commands::run_bench(
                    config,
                    &pipelines,
                    volume,
                    args.repetitions,
                    io::stdout().lock(),
                )?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "hll: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
