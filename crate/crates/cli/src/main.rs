use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use teamform_cli::formats::{instance_to_json, load_instance, load_rule, save_instance};
use teamform_cli::report::{
    run_algorithm, trace_csv, Algorithm, SolveReport, TrainReport,
};
use teamform_cli::suite::{load_suite, results_csv, run_grid, run_sweep, timing_csv};
use teamform_core::baselines::BaselineConfig;
use teamform_core::evaluator::{brute_force_optimum, total_efficiency};
use teamform_core::gp::Decoder;
use teamform_core::problem::{generate_instance, validate_instance, GeneratorParams};
use teamform_core::rl::{Mode, RlConfig};
use teamform_core::train::{ModePolicy, TrainConfig};

/// Team formation solver: builds teams whose person-job fit and mutual
/// communication willingness maximize total efficiency, and learns
/// candidate-ranking rules for doing so.
#[derive(Parser)]
#[command(name = "teamform", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance document.
    Gen(GenArgs),
    /// Check an instance document against every structural invariant.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Build one team with a heuristic, a search baseline or a rule file.
    Solve(SolveArgs),
    /// Learn a ranking rule on an instance.
    Train(TrainArgs),
    /// Run a benchmark suite and write CSV reports.
    Bench(BenchArgs),
    /// Exhaustive optimum of a tiny instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Number of team positions.
    #[arg(long)]
    positions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidate pool size as a multiple of the position count.
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    /// Team skills as a fraction of the position count.
    #[arg(long = "sp-ratio", default_value_t = 0.4)]
    sp_ratio: f64,
    /// Skill universe size; 0 derives it from the team-skill count.
    #[arg(long, default_value_t = 0)]
    skills: usize,
    /// Competency dimensions per position.
    #[arg(long, default_value_t = 3)]
    dims: usize,
    /// Cap on non-team skills per candidate.
    #[arg(long = "extra-skills", default_value_t = 3)]
    extra_skills: usize,
    /// Write the instance here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveAlgo {
    Ch1,
    Ch2,
    Ga,
    Vns,
    /// Decode a rule file.
    Rule,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: SolveAlgo,
    /// Rule file for `--algo rule`.
    #[arg(long = "rule-file")]
    rule_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrainAlgo {
    /// Full method: learned mode selection plus the surrogate.
    Rlgp,
    /// Plain GP: mode locked to P1, surrogate off.
    Bgp,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    P1,
    P2,
    P3,
    P4,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = TrainAlgo::Rlgp)]
    algo: TrainAlgo,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    #[arg(long = "pop-size", default_value_t = 100)]
    pop_size: usize,
    /// Exploration probability of the mode-selection agent.
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Learning rate of the agent.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Discount factor of the agent.
    #[arg(long, default_value_t = 0.9)]
    discount: f64,
    /// Surrogate neighbour count.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Generations between real-evaluation refreshes.
    #[arg(long, default_value_t = 5)]
    refresh: usize,
    #[arg(long, value_enum)]
    surrogate: Option<OnOff>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Also write the per-generation trace CSV (requires --out).
    #[arg(long)]
    trace: bool,
    /// Output directory; files are named instance-algorithm-seed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite configuration (JSON).
    #[arg(long)]
    suite: PathBuf,
    /// Worker threads for suite entries.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => {
            let params = GeneratorParams {
                num_positions: args.positions,
                candidate_ratio: args.ratio,
                sp_ratio: args.sp_ratio,
                skill_pool: args.skills,
                dims: args.dims,
                max_skills_per_candidate: args.extra_skills,
                ..GeneratorParams::default()
            };
            let inst = generate_instance(&params, args.seed)?;
            match &args.out {
                Some(path) => {
                    save_instance(&inst, path)?;
                    eprintln!("wrote {} ({} candidates, {} positions)",
                        path.display(), inst.num_candidates(), inst.num_positions());
                }
                None => println!("{}", instance_to_json(&inst)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { instance } => {
            // Parse leniently so every structural violation can be listed.
            let text = fs::read_to_string(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            let inst: teamform_core::problem::Instance = serde_json::from_str(&text)
                .with_context(|| format!("parsing instance document {}", instance.display()))?;
            let report = validate_instance(&inst);
            if report.is_clean() {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{report}");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Solve(args) => {
            let inst = load_instance(&args.instance)?;
            let report = match args.algo {
                SolveAlgo::Rule => {
                    let rule_path = args
                        .rule_file
                        .ok_or_else(|| anyhow!("--algo rule requires --rule-file"))?;
                    let rule = load_rule(&rule_path)?;
                    let decoder = Decoder::new(&inst).map_err(|e| anyhow!("{e}"))?;
                    let outcome = decoder.decode(&rule);
                    let eval =
                        total_efficiency(&inst, decoder.match_matrix(), &outcome.assignment)
                            .map_err(|e| anyhow!("{e}"))?;
                    SolveReport::new(&inst, "rule", None, Some(&rule), &outcome.assignment, &eval)
                }
                _ => {
                    let algorithm = match args.algo {
                        SolveAlgo::Ch1 => Algorithm::Ch1,
                        SolveAlgo::Ch2 => Algorithm::Ch2,
                        SolveAlgo::Ga => Algorithm::Ga,
                        SolveAlgo::Vns => Algorithm::Vns,
                        SolveAlgo::Rule => unreachable!(),
                    };
                    let (report, _) = run_algorithm(
                        &inst,
                        algorithm,
                        &TrainConfig::default(),
                        &BaselineConfig::default(),
                        args.seed,
                    )?;
                    report
                }
            };
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), args.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Train(args) => {
            let inst = load_instance(&args.instance)?;
            let mut cfg = TrainConfig {
                generations: args.generations,
                rl: RlConfig {
                    alpha: args.alpha,
                    gamma_discount: args.discount,
                    epsilon: args.epsilon,
                    ..RlConfig::default()
                },
                k: args.k,
                refresh_interval: args.refresh,
                ..TrainConfig::default()
            };
            cfg.gp.pop_size = args.pop_size;
            cfg.mode_policy = match args.mode {
                ModeArg::Auto => ModePolicy::Auto,
                ModeArg::P1 => ModePolicy::Locked(Mode::P1),
                ModeArg::P2 => ModePolicy::Locked(Mode::P2),
                ModeArg::P3 => ModePolicy::Locked(Mode::P3),
                ModeArg::P4 => ModePolicy::Locked(Mode::P4),
            };
            if let Some(s) = args.surrogate {
                cfg.surrogate = matches!(s, OnOff::On);
            }
            let algorithm = match args.algo {
                TrainAlgo::Rlgp => Algorithm::RlGp,
                TrainAlgo::Bgp => {
                    cfg.mode_policy = ModePolicy::Locked(Mode::P1);
                    cfg.surrogate = false;
                    Algorithm::Bgp
                }
            };

            let result = teamform_core::train::run_training(&inst, &cfg, args.seed)
                .map_err(|e| anyhow!("{e}"))?;
            let report = TrainReport::new(&inst, algorithm.name(), &cfg, &result);
            let json = serde_json::to_string_pretty(&report)? + "\n";
            match &args.out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    let stem = format!("{}-{}-{}", inst.name, algorithm.name(), args.seed);
                    fs::write(dir.join(format!("{stem}.json")), &json)?;
                    if args.trace {
                        fs::write(dir.join(format!("{stem}-trace.csv")), trace_csv(&result))?;
                    }
                    eprintln!("wrote {}/{stem}.json (best_te {:.4})", dir.display(), result.best_te);
                }
                None => {
                    if args.trace {
                        bail!("--trace needs --out to place the CSV next to the result");
                    }
                    println!("{json}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(args) => {
            let suite = load_suite(&args.suite)?;
            fs::create_dir_all(&args.out)?;
            let rows = run_grid(&suite, args.jobs)?;
            fs::write(args.out.join("results.csv"), results_csv(&rows, &suite.algorithms))?;
            fs::write(args.out.join("timing.csv"), timing_csv(&rows))?;
            if let Some(sweep) = &suite.sp_sweep {
                fs::write(args.out.join("sp_sweep.csv"), run_sweep(&suite, sweep, args.jobs)?)?;
            }
            eprintln!("wrote reports to {}", args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { instance, out } => {
            let inst = load_instance(&instance)?;
            let result = brute_force_optimum(&inst).map_err(|e| anyhow!("{e}"))?;
            let report = match &result.best {
                Some((assignment, _)) => {
                    let decoder = Decoder::new(&inst).map_err(|e| anyhow!("{e}"))?;
                    let eval = total_efficiency(&inst, decoder.match_matrix(), assignment)
                        .map_err(|e| anyhow!("{e}"))?;
                    let mut r =
                        SolveReport::new(&inst, "oracle", None, None, assignment, &eval);
                    r.total_efficiency = result.best.as_ref().expect("present").1;
                    serde_json::json!({
                        "report": r,
                        "enumerated": result.enumerated,
                        "feasible_count": result.feasible_count,
                    })
                }
                None => serde_json::json!({
                    "report": serde_json::Value::Null,
                    "enumerated": result.enumerated,
                    "feasible_count": 0,
                }),
            };
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
