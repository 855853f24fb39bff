mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::output::CliError;

#[derive(Parser)]
#[command(name = "hvtm", version, about = "Hypervector Tsetlin Machine toolkit")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train seeded ensemble replicas and write curves and models.
    Train {
        #[command(flatten)]
        run: RunFlags,
        /// Output directory.
        #[arg(long, default_value = "hvtm-train")]
        out: PathBuf,
    },
    /// Evaluate a saved model on a dataset's test split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Also write metrics and a manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the ensemble protocol over a grid of HV sizes, NBits and clause
    /// counts.
    Sweep {
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        axes: AxisFlags,
        #[arg(long, default_value = "hvtm-sweep")]
        out: PathBuf,
    },
    /// Export and decode a model's clauses.
    Explain {
        #[arg(long)]
        model: PathBuf,
        /// Extra codebook file to decode against.
        #[arg(long)]
        codebooks: Option<PathBuf>,
        /// Rotation the extra codebook's tokens were bound with.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        codebook_shift: i64,
        /// Matches kept per clause; 0 lists positions only.
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[arg(long, value_enum, default_value_t = ExplainFormat::Jsonl)]
        format: ExplainFormat,
        /// Write reports and a manifest here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a dataset split into a hypervector cache file.
    Encode {
        #[command(flatten)]
        run: RunFlags,
        #[arg(long, value_enum, default_value_t = Split::Train)]
        split: Split,
        /// Replica whose codebooks are used.
        #[arg(long, default_value_t = 0)]
        replica: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print token capacity and overlap likelihood for a hypervector size.
    Info {
        #[arg(long)]
        hv_size: u64,
        #[arg(long)]
        nbits: u64,
        /// Number of tokens bundled together.
        #[arg(long, default_value_t = 0)]
        tokens: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ExplainFormat {
    Jsonl,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DatasetKind {
    Xor,
    Mnist,
    Text,
    Fingerprint,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LabelsArg {
    None,
    Hiv,
    TrecCoarse,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ReprArg {
    Vanilla,
    Hypervector,
}

/// Flags mirroring the run configuration; each overrides the config file.
#[derive(Args, Clone, Default)]
pub struct RunFlags {
    /// JSON or TOML run configuration, or a manifest written by a previous
    /// run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetKind>,
    /// Directory with the four IDX files.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Training TSV file.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test TSV file.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub fingerprint_length: Option<usize>,
    #[arg(long, value_enum)]
    pub labels: Option<LabelsArg>,
    #[arg(long, value_enum)]
    pub representation: Option<ReprArg>,
    #[arg(long)]
    pub hv_size: Option<usize>,
    #[arg(long)]
    pub nbits: Option<usize>,
    #[arg(long)]
    pub clauses: Option<usize>,
    #[arg(long)]
    pub threshold: Option<u32>,
    #[arg(long)]
    pub specificity: Option<f64>,
    #[arg(long)]
    pub boost: Option<bool>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub ensembles: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub train_per_class: Option<usize>,
    #[arg(long)]
    pub test_per_class: Option<usize>,
    /// Square patch side for the image encoder.
    #[arg(long)]
    pub patch_size: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub binarize_threshold: Option<u8>,
    #[arg(long)]
    pub position_binding: Option<bool>,
    #[arg(long)]
    pub skip_empty_patches: Option<bool>,
}

#[derive(Args, Clone, Default)]
pub struct AxisFlags {
    #[arg(long, value_delimiter = ',')]
    pub hv_sizes: Vec<usize>,
    #[arg(long = "nbits-axis", value_delimiter = ',')]
    pub nbits_axis: Vec<usize>,
    #[arg(long = "clauses-axis", value_delimiter = ',')]
    pub clauses_axis: Vec<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { run, out } => commands::train(&run, &out),
        Command::Eval { model, run, out } => commands::eval(&model, &run, out.as_deref()),
        Command::Sweep { run, axes, out } => commands::sweep(&run, &axes, &out),
        Command::Explain {
            model,
            codebooks,
            codebook_shift,
            top_k,
            format,
            out,
        } => commands::explain(
            &model,
            codebooks.as_deref(),
            codebook_shift,
            top_k,
            format,
            out.as_deref(),
        ),
        Command::Encode {
            run,
            split,
            replica,
            out,
        } => commands::encode(&run, split, replica, &out),
        Command::Info {
            hv_size,
            nbits,
            tokens,
        } => commands::info(hv_size, nbits, tokens),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
