//! `rof`: command-line front end for the read-once formula toolkit.
//!
//! Exit codes: 0 on success, 2 when a property check fails (a tester
//! rejects, an exactness check finds a mismatch), 1 on usage or IO errors.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rof_core::distance::{farness, Target};
use rof_core::formula::{parse_formula, Assignment, CountingOracle, Formula, MvGate};
use rof_core::frac::Frac;
use rof_core::harness::{
    batch_to_csv, batch_to_json, query_scaling, rows_to_json, run_batch, scaling_to_csv,
    tv_over_heights, tv_to_csv, Algo, ExperimentConfig, Family, ScalingSpec, Task,
};
use rof_core::lowerbound::{
    build_balancing_formula, farness_experiment, indist_exact, indist_tv, sample_distribution,
    Dist,
};
use rof_core::normalize::to_kx_basic_counted;
use rof_core::testers::{alg1_test, alg2_median, alg3_test, TestParams};
use serde_json::json;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rof", version, about = "Read-once formula toolkit")]
struct Cli {
    /// Master seed for anything randomized. Batches derive per-trial seeds
    /// from it; single runs use it directly.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format. Default: plain text for single results, json for
    /// batch, scaling, and sweep tables. csv applies to tables only.
    #[arg(long, global = true, value_enum)]
    emit: Option<Emit>,
    /// JSON file overriding the experiment config (constants, trials,
    /// master_seed, timings). Missing fields keep their defaults.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Bal4,
    Bal5,
}

impl VariantArg {
    fn gate(self) -> MvGate {
        match self {
            VariantArg::Bal4 => MvGate::Bal4,
            VariantArg::Bal5 => MvGate::Bal5,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Dy,
    Dn,
}

impl DistArg {
    fn dist(self) -> Dist {
        match self {
            DistArg::Dy => Dist::Dy,
            DistArg::Dn => Dist::Dn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Alg1,
    Alg2,
    Alg3,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    BalancedAndOr,
    OrOfAnds,
    RandomBasic,
    RandomKxBasic,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ModeArg {
    Exact,
    Tv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rewrite a formula into k-x-basic form.
    Normalize {
        /// Formula text, or @path to read it from a file.
        formula: String,
        /// Arity bound for unforceable gates.
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Evaluate a formula on an assignment.
    Eval {
        formula: String,
        /// Assignment string (one symbol character per variable), or @path.
        assignment: String,
    },
    /// Exact distance from an assignment to the nearest accepted input.
    Distance {
        formula: String,
        assignment: String,
        /// Target an exact output symbol instead of the accept set.
        #[arg(long)]
        value: Option<String>,
    },
    /// One seeded tester run. Exits 2 when the tester rejects.
    Test {
        formula: String,
        assignment: String,
        /// 1 (k-x-basic tester) or 3 (basic-formula tester).
        #[arg(long, default_value_t = 1)]
        alg: u8,
        #[arg(long, default_value = "1/4")]
        eps: Frac,
        /// Confidence parameter; algorithm 1 only.
        #[arg(long, default_value = "1/3")]
        delta: Frac,
        /// Arity bound; algorithm 1 only.
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Target bit; algorithm 1 tests membership in SAT(formula = b).
        #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
        b: bool,
    },
    /// One seeded median-amplified distance estimate.
    Estimate {
        formula: String,
        assignment: String,
        #[arg(long, default_value = "1/4")]
        eps: Frac,
        #[arg(long, default_value = "1/100")]
        delta: Frac,
    },
    /// Replay a task across seeded trials and aggregate the reports.
    Batch {
        #[command(subcommand)]
        task: BatchTask,
        /// Trial count, overriding the config.
        #[arg(long, global = true)]
        trials: Option<u64>,
    },
    /// Query counts across instance sizes, one verified far instance each.
    Scaling {
        #[arg(long, value_enum, default_value = "alg1")]
        algo: AlgoArg,
        #[arg(long, value_enum, default_value = "balanced-and-or")]
        family: FamilyArg,
        /// log2 variable counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u32>,
        #[arg(long, default_value = "1/4")]
        eps: Frac,
        #[arg(long, default_value = "1/3")]
        delta: Frac,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        /// Far-assignment search budget per size.
        #[arg(long, default_value_t = 64)]
        retries: u32,
        /// Runs per size, overriding the config's trial count.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Balancing-formula experiments.
    Lb {
        #[command(subcommand)]
        cmd: LbCmd,
    },
}

#[derive(Subcommand)]
enum BatchTask {
    /// A tester against one fixed instance.
    Test {
        formula: String,
        assignment: String,
        #[arg(long, default_value_t = 1)]
        alg: u8,
        #[arg(long, default_value = "1/4")]
        eps: Frac,
        #[arg(long, default_value = "1/3")]
        delta: Frac,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
        b: bool,
    },
    /// The estimator against one fixed instance.
    Estimate {
        formula: String,
        assignment: String,
        #[arg(long, default_value = "1/4")]
        eps: Frac,
        #[arg(long, default_value = "1/3")]
        delta: Frac,
    },
    /// Draws from a balancing distribution, each measured exactly.
    Draw {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long, value_enum)]
        dist: DistArg,
        #[arg(long)]
        height: u32,
    },
}

#[derive(Subcommand)]
enum LbCmd {
    /// Print the balancing formula of the given height.
    Build {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        height: u32,
    },
    /// Draw one sample and print it.
    Sample {
        #[arg(long, value_enum)]
        dist: DistArg,
        #[arg(long)]
        height: u32,
    },
    /// Exact-distance statistics over many draws.
    Farness {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long, value_enum)]
        dist: DistArg,
        #[arg(long)]
        height: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Compare the two distributions on a query set: exact conditional
    /// outcome distributions, or sampled total variation. Exits 2 if the
    /// exact mode finds a mismatched admissible level.
    Indist {
        #[arg(long)]
        height: Option<u32>,
        /// Query positions, comma separated.
        #[arg(long, value_delimiter = ',')]
        queries: Vec<u32>,
        /// Defaults to exact for a single height, tv for a sweep.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Sweep mode: sampled TV at each height with queries fixed to
        /// {0, 1, 2^(h-1)}.
        #[arg(long, value_delimiter = ',')]
        heights: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here and are not usage errors
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_arg(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}")),
        None => Ok(arg.to_string()),
    }
}

fn load_formula(arg: &str) -> Result<Formula> {
    let text = read_arg(arg)?;
    Ok(parse_formula(text.trim())?.with_stats())
}

fn load_assignment(f: &Formula, arg: &str) -> Result<Assignment> {
    let text = read_arg(arg)?;
    let a = Assignment::parse(f.alphabet(), text.trim())?;
    if a.len() != f.n_vars() as usize {
        bail!(
            "assignment has {} symbols but the formula has {} variables",
            a.len(),
            f.n_vars()
        );
    }
    Ok(a)
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.params {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

/// Emit a table that has both a JSON and a CSV form.
fn emit_table(emit: Option<Emit>, json: String, csv: String) {
    match emit {
        Some(Emit::Csv) => print!("{csv}"),
        _ => println!("{json}"),
    }
}

/// Scalar results print as plain text by default and have no CSV form.
fn scalar_emit(emit: Option<Emit>) -> Result<bool> {
    if emit == Some(Emit::Csv) {
        bail!("csv output applies to batch, scaling, and sweep tables");
    }
    Ok(emit == Some(Emit::Json))
}

fn run(cli: Cli) -> Result<bool> {
    let config = load_config(&cli)?;
    match cli.cmd {
        Cmd::Normalize { formula, k } => {
            let as_json = scalar_emit(cli.emit)?;
            let f = load_formula(&formula)?;
            let (out, rewrites) = to_kx_basic_counted(&f, k)?;
            let text = out.to_text()?;
            if as_json {
                println!(
                    "{}",
                    json!({
                        "k": k,
                        "rewrites": rewrites,
                        "input_vertices": f.vertex_count(),
                        "output_vertices": out.vertex_count(),
                        "text": text,
                    })
                );
            } else {
                println!("{text}");
            }
            Ok(true)
        }
        Cmd::Eval {
            formula,
            assignment,
        } => {
            let as_json = scalar_emit(cli.emit)?;
            let f = load_formula(&formula)?;
            let a = load_assignment(&f, &assignment)?;
            let out = f.evaluate(&a)?;
            let accepted = f.alphabet().accept_set().contains(&out);
            let symbol = f.alphabet().symbol_char(out);
            if as_json {
                println!("{}", json!({ "symbol": symbol.to_string(), "accepted": accepted }));
            } else {
                println!("{symbol} {}", if accepted { "accept" } else { "reject" });
            }
            Ok(true)
        }
        Cmd::Distance {
            formula,
            assignment,
            value,
        } => {
            let as_json = scalar_emit(cli.emit)?;
            let f = load_formula(&formula)?;
            let a = load_assignment(&f, &assignment)?;
            let target = match &value {
                Some(s) => {
                    let mut chars = s.chars();
                    let (Some(c), None) = (chars.next(), chars.next()) else {
                        bail!("--value takes a single symbol character");
                    };
                    let sym = f
                        .alphabet()
                        .parse_char(c)
                        .with_context(|| format!("symbol {c:?} is not in the {} alphabet", f.alphabet().label()))?;
                    Target::Value(sym)
                }
                None => Target::Accept,
            };
            match farness(&f, &a, target)? {
                Some(fr) => {
                    if as_json {
                        println!(
                            "{}",
                            json!({
                                "cost": fr.cost,
                                "size": fr.size,
                                "farness": { "num": fr.cost, "den": fr.size },
                            })
                        );
                    } else {
                        println!("cost {} size {} farness {}", fr.cost, fr.size, Frac::new(fr.cost, fr.size));
                    }
                }
                None => {
                    if as_json {
                        println!("{}", json!({ "reachable": false }));
                    } else {
                        println!("unreachable");
                    }
                }
            }
            Ok(true)
        }
        Cmd::Test {
            formula,
            assignment,
            alg,
            eps,
            delta,
            k,
            b,
        } => {
            let as_json = scalar_emit(cli.emit)?;
            let f = load_formula(&formula)?;
            let a = load_assignment(&f, &assignment)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
            let mut o = CountingOracle::new(&a);
            let verdict = match alg {
                1 => alg1_test(
                    &f,
                    TestParams::new(eps.as_f64(), delta.as_f64(), k, b),
                    &config.constants,
                    &mut o,
                    &mut rng,
                )?,
                3 => alg3_test(&f, eps.as_f64(), &config.constants, &mut o, &mut rng)?,
                _ => bail!("--alg must be 1 or 3; the estimator is `rof estimate`"),
            };
            let word = if verdict { "accept" } else { "reject" };
            if as_json {
                println!(
                    "{}",
                    json!({ "algorithm": format!("alg{alg}"), "verdict": word, "queries": o.query_count() })
                );
            } else {
                println!("{word} queries {}", o.query_count());
            }
            Ok(verdict)
        }
        Cmd::Estimate {
            formula,
            assignment,
            eps,
            delta,
        } => {
            let as_json = scalar_emit(cli.emit)?;
            let f = load_formula(&formula)?;
            let a = load_assignment(&f, &assignment)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
            let mut o = CountingOracle::new(&a);
            let est = alg2_median(&f, eps.as_f64(), delta.as_f64(), &config.constants, &mut o, &mut rng)?;
            if as_json {
                println!("{}", json!({ "eta": est.eta, "queries": est.queries }));
            } else {
                println!("eta {} queries {}", est.eta, est.queries);
            }
            Ok(true)
        }
        Cmd::Batch { task, trials } => {
            let mut config = config;
            if let Some(t) = trials {
                config.trials = t;
                config.validate()?;
            }
            let report = match &task {
                BatchTask::Test {
                    formula,
                    assignment,
                    alg,
                    eps,
                    delta,
                    k,
                    b,
                } => {
                    let f = load_formula(formula)?;
                    let a = load_assignment(&f, assignment)?;
                    let task = match alg {
                        1 => Task::Test {
                            f: &f,
                            a: &a,
                            params: TestParams::new(eps.as_f64(), delta.as_f64(), *k, *b),
                        },
                        3 => Task::BasicTest {
                            f: &f,
                            a: &a,
                            eps: eps.as_f64(),
                        },
                        _ => bail!("--alg must be 1 or 3; the estimator is `batch estimate`"),
                    };
                    run_batch(&config, &task)?
                }
                BatchTask::Estimate {
                    formula,
                    assignment,
                    eps,
                    delta,
                } => {
                    let f = load_formula(formula)?;
                    let a = load_assignment(&f, assignment)?;
                    run_batch(
                        &config,
                        &Task::Estimate {
                            f: &f,
                            a: &a,
                            eps: eps.as_f64(),
                            delta: delta.as_f64(),
                        },
                    )?
                }
                BatchTask::Draw {
                    variant,
                    dist,
                    height,
                } => run_batch(
                    &config,
                    &Task::Distribution {
                        variant: variant.gate(),
                        dist: dist.dist(),
                        height: *height,
                    },
                )?,
            };
            emit_table(cli.emit, batch_to_json(&report), batch_to_csv(&report));
            Ok(true)
        }
        Cmd::Scaling {
            algo,
            family,
            sizes,
            eps,
            delta,
            k,
            max_arity,
            retries,
            trials,
        } => {
            let mut config = config;
            if let Some(t) = trials {
                config.trials = t;
                config.validate()?;
            }
            let spec = ScalingSpec {
                algo: match algo {
                    AlgoArg::Alg1 => Algo::Alg1,
                    AlgoArg::Alg2 => Algo::Alg2,
                    AlgoArg::Alg3 => Algo::Alg3,
                },
                family: match family {
                    FamilyArg::BalancedAndOr => Family::BalancedAndOr,
                    FamilyArg::OrOfAnds => Family::OrOfAnds,
                    FamilyArg::RandomBasic => Family::RandomBasic,
                    FamilyArg::RandomKxBasic => Family::RandomKxBasic,
                },
                sizes_log2: sizes,
                eps,
                delta: delta.as_f64(),
                k,
                max_arity,
                retries,
            };
            let rows = query_scaling(&config, &spec)?;
            emit_table(cli.emit, rows_to_json(&rows), scaling_to_csv(&rows));
            Ok(true)
        }
        Cmd::Lb { cmd } => run_lb(cmd, &config, cli.emit),
    }
}

fn run_lb(cmd: LbCmd, config: &ExperimentConfig, emit: Option<Emit>) -> Result<bool> {
    match cmd {
        LbCmd::Build { variant, height } => {
            let as_json = scalar_emit(emit)?;
            let f = build_balancing_formula(variant.gate(), height)?;
            let text = f.to_text()?;
            if as_json {
                println!(
                    "{}",
                    json!({ "height": height, "n_vars": f.n_vars(), "vertices": f.vertex_count(), "text": text })
                );
            } else {
                println!("{text}");
            }
            Ok(true)
        }
        LbCmd::Sample { dist, height } => {
            let as_json = scalar_emit(emit)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
            let sample = sample_distribution(dist.dist(), height, &mut rng)?;
            if as_json {
                println!("{}", serde_json::to_string(&sample)?);
            } else {
                println!("{}", sample.bit_string());
            }
            Ok(true)
        }
        LbCmd::Farness {
            variant,
            dist,
            height,
            trials,
        } => {
            let report =
                farness_experiment(variant.gate(), dist.dist(), height, trials, config.master_seed)?;
            if emit == Some(Emit::Csv) {
                bail!("csv output applies to batch, scaling, and sweep tables");
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(true)
        }
        LbCmd::Indist {
            height,
            queries,
            mode,
            samples,
            heights,
        } => {
            if !heights.is_empty() {
                if mode == Some(ModeArg::Exact) {
                    bail!("--heights sweeps sampled TV; drop --mode exact");
                }
                if height.is_some() || !queries.is_empty() {
                    bail!("--heights fixes the query set; drop --height and --queries");
                }
                let rows = tv_over_heights(config, &heights, samples)?;
                emit_table(emit, rows_to_json(&rows), tv_to_csv(&rows));
                return Ok(true);
            }
            let as_json = scalar_emit(emit)?;
            let Some(h) = height else {
                bail!("--height is required unless sweeping with --heights");
            };
            if queries.is_empty() {
                bail!("--queries must name at least one position");
            }
            match mode.unwrap_or(ModeArg::Exact) {
                ModeArg::Exact => {
                    let report = indist_exact(&queries, h)?;
                    if as_json {
                        println!("{}", serde_json::to_string_pretty(&report)?);
                    } else {
                        let verdict = if report.all_match { "match" } else { "MISMATCH" };
                        println!(
                            "{verdict} admissible {:?} tv {} bound {}",
                            report.admissible_levels, report.unconditional_tv, report.tv_bound
                        );
                    }
                    Ok(report.all_match)
                }
                ModeArg::Tv => {
                    let report = indist_tv(&queries, h, samples, config.master_seed)?;
                    if as_json {
                        println!("{}", serde_json::to_string_pretty(&report)?);
                    } else {
                        println!("tv {} se {}", report.tv, report.bootstrap_se);
                    }
                    Ok(true)
                }
            }
        }
    }
}
