use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ergolab::acceptance;
use ergolab::config::{ConfigFile, MapParamsSpec, ALL_EXPERIMENTS};
use ergolab::experiments::RunRequest;
use ergolab::store::Store;
use ergolab::{ExperimentId, HarnessError, RunSpec};

#[derive(Parser)]
#[command(
    name = "ergolab",
    version,
    about = "Experiments on spatial discretizations of expanding circle maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; writes a CSV and a metadata sidecar under --out.
    Run(Box<RunArgs>),
    /// List experiment ids with their default settings.
    List,
    /// Run the ten acceptance checks, one line each.
    Verify,
    /// Delete the cell cache under an output directory.
    CleanCache {
        #[arg(long, default_value = "ergolab-out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment id, e.g. `srb-distance` (see `ergolab list`).
    experiment: String,
    /// JSON config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid sizes, comma-separated.
    #[arg(long = "n", value_delimiter = ',')]
    grid_orders: Option<Vec<u64>>,
    /// Number of time steps.
    #[arg(long)]
    kmax: Option<usize>,
    /// Scheme names, comma-separated (e.g. map-to-closest,stepwise-random).
    #[arg(long = "scheme", value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// RNG seeds, comma-separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Transfer-operator grid size.
    #[arg(long)]
    resolution: Option<usize>,
    /// Degree cap for the preimage-count polynomials.
    #[arg(long)]
    mmax: Option<usize>,
    /// Half-width of the local preimage window, in cells.
    #[arg(long)]
    window: Option<usize>,
    /// Parameter step for the 25-map perturbation ensemble.
    #[arg(long)]
    ensemble_step: Option<f64>,
    /// Cap on the analytic reference curve length.
    #[arg(long = "pk-kmax")]
    pk_k_max: Option<usize>,
    /// First sine coefficient (give --c2 and --shift with it).
    #[arg(long, requires = "c2", requires = "shift")]
    c1: Option<f64>,
    /// Second sine coefficient.
    #[arg(long, requires = "c1")]
    c2: Option<f64>,
    /// Rotation offset.
    #[arg(long, requires = "c1")]
    shift: Option<f64>,
    /// Output directory (the cell cache lives under it).
    #[arg(long, default_value = "ergolab-out")]
    out: PathBuf,
    /// Accepted for convenience; runs always reuse cached cells.
    #[arg(long)]
    resume: bool,
    /// Abort after this many newly computed cells (testing hook).
    #[arg(long, hide = true)]
    max_cells: Option<usize>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => match run_experiment(*args) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Verify => verify(),
        Command::CleanCache { out } => match Store::clean(&out.join("cache")) {
            Ok(()) => {
                println!("removed {}", out.join("cache").display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}

fn run_experiment(args: RunArgs) -> Result<ExitCode, HarnessError> {
    let id: ExperimentId = args.experiment.parse()?;
    let config = match &args.config {
        Some(path) => Some(ConfigFile::load(path)?),
        None => None,
    };
    let map_params = match (args.c1, args.c2, args.shift) {
        (Some(c1), Some(c2), Some(shift)) => Some(MapParamsSpec { c1, c2, shift }),
        _ => None,
    };
    let overrides = ConfigFile {
        experiment_id: None,
        map_params,
        ensemble_step: args.ensemble_step,
        grid_orders: args.grid_orders,
        k_max: args.kmax,
        schemes: args.schemes,
        seeds: args.seeds,
        resolution: args.resolution,
        m_max: args.mmax,
        window: args.window,
        pk_k_max: args.pk_k_max,
    };
    let spec = RunSpec::resolve(id, config.as_ref(), &overrides)?;
    if args.resume {
        eprintln!("note: runs always reuse cached cells; --resume changes nothing");
    }
    let mut req = RunRequest::new(spec, &args.out);
    req.max_new_cells = args.max_cells;
    match ergolab::run(&req) {
        Ok(summary) => {
            println!(
                "wrote {} ({} rows; {} cells computed, {} reused)",
                summary.csv_path.display(),
                summary.rows,
                summary.computed,
                summary.reused
            );
            println!("meta  {}", summary.meta_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Err(HarnessError::Interrupted { computed }) => {
            eprintln!("interrupted after {computed} new cells; rerun the same command to resume");
            Ok(ExitCode::from(3))
        }
        Err(e) => Err(e),
    }
}

fn fmt_orders(orders: &[u64]) -> String {
    match orders {
        [] => "-".into(),
        [one] => one.to_string(),
        [first, .., last] => format!("{first}..{last} ({} sizes)", orders.len()),
    }
}

fn list() {
    println!("{:<24} {:>22} {:>6} {:>11}  notes", "experiment", "n", "kMax", "resolution");
    for id in ALL_EXPERIMENTS {
        let d = RunSpec::defaults(id);
        let mut notes = Vec::new();
        if d.ensemble_step.is_some() {
            notes.push("25-map ensemble".to_string());
        }
        if d.seeds.len() > 1 {
            notes.push(format!("{} seeds", d.seeds.len()));
        }
        if id == ExperimentId::SchemeComparison {
            notes.push(format!("{} schemes", d.schemes.len()));
        }
        println!(
            "{:<24} {:>22} {:>6} {:>11}  {}",
            id.name(),
            fmt_orders(&d.grid_orders),
            d.k_max,
            d.resolution,
            notes.join(", ")
        );
    }
}

fn verify() -> ExitCode {
    let mut all_passed = true;
    for id in 1..=acceptance::CRITERIA.len() {
        let report = acceptance::run_criterion(id);
        all_passed &= report.passed;
        println!(
            "C{:02} {:<52} {}",
            report.id,
            report.name,
            if report.passed { "pass" } else { "FAIL" }
        );
        println!("    {}", report.details);
    }
    if all_passed {
        println!("all {} criteria passed", acceptance::CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
