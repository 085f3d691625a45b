use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vsched::experiment::{emit_plot_data, results_csv, run_experiment, ExperimentConfig, Metric};
use vsched::hls::{join_playlists, MasterPlaylist, MediaPlaylist};
use vsched::io::{parse_ladder_spec, read_scenario_csv, read_schedule_csv, write_schedule_csv};
use vsched::kv::parse_list;
use vsched::schedulers::oracle::{check_against_brute_force, InstanceShape};
use vsched::schedulers::{run_scheduler, ExactError, GreedyConfig, SchedulerKind, SchedulerOptions, SolverBudget};
use vsched::ObjectiveWeights;

/// Process exit codes.
mod exit {
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const INFEASIBLE: u8 = 4;
    pub const BUDGET: u8 = 5;
    pub const MISMATCH: u8 = 6;
}

#[derive(Parser)]
#[command(name = "vsched", version, about = "Anticipatory video segment scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the removal-count sweep and write result and plot CSV files.
    Simulate {
        /// key=value experiment config; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Schedule a scenario CSV and print the schedule CSV.
    Schedule {
        #[arg(long)]
        scenario: PathBuf,
        /// `reference` or `size[:bandwidth[:label]],...` lowest first.
        #[arg(long, default_value = "reference")]
        ladder: String,
        /// bufferFirst, qualityFirst, fill or exact.
        #[arg(long)]
        scheduler: SchedulerKind,
        /// Lateness, quality and buffer weights.
        #[arg(long, default_value = "440,10,1")]
        weights: String,
        /// Segments per user; defaults to the number of slots.
        #[arg(long)]
        segments: Option<usize>,
        #[arg(long, default_value_t = 10.0)]
        slot_seconds: f64,
        #[arg(long, default_value_t = 3)]
        max_buffer: usize,
        /// Search-node limit for the exact solver.
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Time limit for the exact solver, in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Join variant playlists into the playlist for one user and slot.
    Rewrite {
        #[arg(long)]
        master: PathBuf,
        /// Variant media playlists, in the order the master lists them.
        #[arg(long, num_args = 1.., required = true)]
        variants: Vec<PathBuf>,
        #[arg(long)]
        schedule: PathBuf,
        /// User number, from 1.
        #[arg(long, default_value_t = 1)]
        user: usize,
        /// Current slot number, from 1.
        #[arg(long)]
        slot: usize,
        #[arg(long, default_value_t = 10)]
        refresh: u64,
    },
    /// Compare the exact solver with exhaustive search on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 5)]
        max_slots: usize,
        #[arg(long, default_value_t = 500)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out_dir } => simulate(config.as_deref(), &out_dir),
        Command::Schedule {
            scenario,
            ladder,
            scheduler,
            weights,
            segments,
            slot_seconds,
            max_buffer,
            max_nodes,
            time_limit,
        } => schedule(ScheduleArgs {
            scenario,
            ladder,
            scheduler,
            weights,
            segments,
            slot_seconds,
            max_buffer,
            max_nodes,
            time_limit,
        }),
        Command::Rewrite {
            master,
            variants,
            schedule,
            user,
            slot,
            refresh,
        } => rewrite(&master, &variants, &schedule, user, slot, refresh),
        Command::OracleCheck {
            max_slots,
            instances,
            seed,
        } => oracle_check(max_slots, instances, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("vsched: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(exit::FAILURE, format!("{}: {e}", path.display())))
}

fn simulate(config: Option<&Path>, out_dir: &Path) -> Result<(), Failure> {
    let config = match config {
        Some(path) => ExperimentConfig::parse(&read(path)?).map_err(|e| Failure::new(exit::PARSE, e))?,
        None => ExperimentConfig::default(),
    };
    let rows = run_experiment(&config).map_err(|e| Failure::new(exit::FAILURE, e))?;
    let plot = emit_plot_data(&rows, &config.ladder, config.confidence_level);
    for note in &plot.notes {
        eprintln!("note: {note}");
    }
    fs::create_dir_all(out_dir).map_err(|e| Failure::new(exit::FAILURE, e))?;
    let mut files = vec![("results.csv", results_csv(&rows))];
    files.extend(Metric::ALL.iter().map(|m| (m.file_name(), plot.get(*m).to_string())));
    for (name, text) in files {
        fs::write(out_dir.join(name), text).map_err(|e| Failure::new(exit::FAILURE, e))?;
    }
    Ok(())
}

struct ScheduleArgs {
    scenario: PathBuf,
    ladder: String,
    scheduler: SchedulerKind,
    weights: String,
    segments: Option<usize>,
    slot_seconds: f64,
    max_buffer: usize,
    max_nodes: Option<u64>,
    time_limit: Option<f64>,
}

fn schedule(args: ScheduleArgs) -> Result<(), Failure> {
    let parse = |e: &dyn std::fmt::Display| Failure::new(exit::PARSE, e);
    let ladder = parse_ladder_spec(&args.ladder).map_err(|e| parse(&e))?;
    let w: Vec<f64> = parse_list(&args.weights).ok_or_else(|| parse(&"weights must be three numbers"))?;
    let [l, q, b] = w[..] else {
        return Err(parse(&"weights must be three numbers"));
    };
    let weights = ObjectiveWeights::new(l, q, b).map_err(|e| parse(&e))?;
    let greedy = GreedyConfig::new(args.max_buffer)
        .ok_or_else(|| Failure::new(exit::USAGE, "--max-buffer must be at least 1"))?;
    let limit = args
        .time_limit
        .map(Duration::try_from_secs_f64)
        .transpose()
        .map_err(|e| Failure::new(exit::USAGE, e))?;
    let budget = if args.max_nodes.is_none() && limit.is_none() {
        SolverBudget::unlimited()
    } else {
        SolverBudget::new(args.max_nodes, limit)
            .ok_or_else(|| Failure::new(exit::USAGE, "solver budget must be positive"))?
    };
    let file = fs::File::open(&args.scenario)
        .map_err(|e| Failure::new(exit::FAILURE, format!("{}: {e}", args.scenario.display())))?;
    let scenario = read_scenario_csv(file, args.segments, args.slot_seconds).map_err(|e| parse(&e))?;
    let options = SchedulerOptions {
        greedy,
        weights,
        budget,
    };
    let result = match run_scheduler(args.scheduler, &scenario, &ladder, &options) {
        Ok(s) => s,
        Err(e @ ExactError::Infeasible { .. }) => return Err(Failure::new(exit::INFEASIBLE, e)),
        Err(ExactError::BudgetExceeded { incumbent }) => {
            if let Some(s) = incumbent {
                let _ = write_schedule_csv(&s, &ladder, io::stdout().lock());
                eprintln!("vsched: printed the best schedule found, optimality not proven");
            }
            return Err(Failure::new(exit::BUDGET, "solver budget exhausted"));
        }
    };
    write_schedule_csv(&result, &ladder, io::stdout().lock()).map_err(|e| Failure::new(exit::FAILURE, e))
}

fn rewrite(
    master: &Path,
    variants: &[PathBuf],
    schedule: &Path,
    user: usize,
    slot: usize,
    refresh: u64,
) -> Result<(), Failure> {
    let parse = |what: &Path, e: &dyn std::fmt::Display| Failure::new(exit::PARSE, format!("{}: {e}", what.display()));
    let master_playlist = MasterPlaylist::parse(&read(master)?).map_err(|e| parse(master, &e))?;
    if variants.len() != master_playlist.variants.len() {
        return Err(Failure::new(
            exit::FAILURE,
            format!(
                "the master lists {} variants but {} variant playlists were given",
                master_playlist.variants.len(),
                variants.len()
            ),
        ));
    }
    let mut map = HashMap::new();
    for (v, path) in master_playlist.variants.iter().zip(variants) {
        map.insert(
            v.uri.clone(),
            MediaPlaylist::parse(&read(path)?).map_err(|e| parse(path, &e))?,
        );
    }
    let sched = read_schedule_csv(read(schedule)?.as_bytes()).map_err(|e| parse(schedule, &e))?;
    if user == 0 || slot == 0 {
        return Err(Failure::new(exit::USAGE, "--user and --slot count from 1"));
    }
    let joined = join_playlists(&master_playlist, &map, &sched, user - 1, slot - 1, refresh)
        .map_err(|e| Failure::new(exit::FAILURE, e))?;
    io::stdout()
        .lock()
        .write_all(joined.emit().as_bytes())
        .map_err(|e| Failure::new(exit::FAILURE, e))
}

fn oracle_check(max_slots: usize, instances: usize, seed: u64) -> Result<(), Failure> {
    if max_slots == 0 {
        return Err(Failure::new(exit::USAGE, "--max-slots must be at least 1"));
    }
    let shape = InstanceShape {
        max_slots,
        max_segments: max_slots.min(5),
        max_levels: 3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = std::time::Instant::now();
    let report = check_against_brute_force(&mut rng, shape, instances, &ObjectiveWeights::default());
    println!(
        "instances={} infeasible={} mismatches={} elapsed_s={:.3}",
        report.instances,
        report.infeasible,
        report.mismatches.len(),
        start.elapsed().as_secs_f64()
    );
    for (i, got, want) in &report.mismatches {
        println!("mismatch instance={i} exact={got} oracle={want}");
    }
    if report.mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            exit::MISMATCH,
            "exact solver disagrees with exhaustive search",
        ))
    }
}
