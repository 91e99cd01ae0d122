//! Batch trial runner, scaling sweeps, and byte-stable report emitters.
//!
//! A batch is a pure function of its config and task: per-trial seeds derive
//! from the master seed by index, trials share no mutable state, and the
//! emitters format every field deterministically, so rerunning a batch
//! reproduces its output byte for byte. With the `parallel` feature enabled
//! [`run_batch`] fans trials out across threads; [`run_batch_seq`] is the
//! always-available sequential path, and the two return identical reports
//! because each trial depends only on its own index.

use crate::distance::{exact_cost, farness, DistanceError, Target};
use crate::formula::{Assignment, CountingOracle, Formula, FormulaError, MvGate};
use crate::frac::Frac;
use crate::generate::{and_of_or2, find_far_assignment, or2_of_ands, random_basic, random_kx_basic};
use crate::lowerbound::{
    build_balancing_formula, indist_tv, sample_distribution, Dist, LowerBoundError, TvIndistReport,
};
use crate::testers::{
    alg1_test_traced, alg2_estimate_traced, alg3_once_traced, Constants, TestParams, TesterError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad experiment config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Tester(#[from] TesterError),
    #[error(transparent)]
    LowerBound(#[from] LowerBoundError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Seed for one trial of a batch, derived from the batch's master seed.
/// splitmix64 finalizer over a golden-ratio stride; trials stay independent
/// of each other and of execution order, so parallel and sequential runs of
/// the same batch see identical streams.
///
/// Index domains, kept disjoint so no two draws in one experiment collide:
/// batch trials use `0..trials`, scaling runs use `size_log2 * 2^32 + run`,
/// instance generation uses `2^63 + size_log2`, and the height sweep uses
/// `2^62 + height`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GEN_INDEX_BASE: u64 = 1 << 63;
const HEIGHT_INDEX_BASE: u64 = 1 << 62;

/// Everything a batch depends on besides the task itself. Two runs with
/// equal configs produce equal reports, sequential or parallel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Numeric knobs for the testers; defaults to the capped desk profile so
    /// batches of hundreds of trials finish in seconds.
    pub constants: Constants,
    pub trials: u64,
    pub master_seed: u64,
    /// Record wall-clock time per trial. Off by default: timing jitter is
    /// the one thing that breaks byte-identical reruns.
    pub timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            constants: Constants::desk(),
            trials: 400,
            master_seed: 0,
            timings: false,
        }
    }
}

impl ExperimentConfig {
    /// Domain check for overridden constants: every coefficient and divisor
    /// positive and finite, caps nonzero when set, at least one trial.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::BadConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let c = &self.constants;
        let coeffs = [
            ("genand_coeff", c.genand_coeff),
            ("est_coeff", c.est_coeff),
            ("slightly_small_shrink_div", c.slightly_small_shrink_div),
            ("recurse_eps_grow_mult", c.recurse_eps_grow_mult),
            ("localdist_coeff", c.localdist_coeff),
            ("twicelocaldist_coeff", c.twicelocaldist_coeff),
            ("mdepth_coeff", c.mdepth_coeff),
            ("numrel_coeff", c.numrel_coeff),
            ("orconst_coeff", c.orconst_coeff),
            ("reps_coeff", c.reps_coeff),
            ("hitprob_div", c.hitprob_div),
            ("hhitprob_div", c.hhitprob_div),
            ("median_reps_coeff", c.median_reps_coeff),
        ];
        for (name, v) in coeffs {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, cap) in [("genand_cap", c.genand_cap), ("est_cap", c.est_cap)] {
            if cap == Some(0) {
                return bad(format!("{name} must be at least 1 when set"));
            }
        }
        Ok(())
    }
}

/// What each trial of a batch runs.
#[derive(Clone, Debug)]
pub enum Task<'a> {
    /// Algorithm 1 against a fixed instance.
    Test {
        f: &'a Formula,
        a: &'a Assignment,
        params: TestParams,
    },
    /// Algorithm 2 distance estimate against a fixed instance.
    Estimate {
        f: &'a Formula,
        a: &'a Assignment,
        eps: f64,
        delta: f64,
    },
    /// Amplified Algorithm 3 against a fixed instance.
    BasicTest {
        f: &'a Formula,
        a: &'a Assignment,
        eps: f64,
    },
    /// Draw from a balancing distribution and measure the draw's exact
    /// distance from acceptance.
    Distribution {
        variant: MvGate,
        dist: Dist,
        height: u32,
    },
}

/// One row of a batch: everything observed about a single seeded trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: u64,
    pub seed: u64,
    pub algorithm: &'static str,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    /// Tester verdict, `true` for accept. For distribution draws, whether
    /// the sampled input satisfies the formula exactly.
    pub verdict: Option<bool>,
    /// Distance estimate, for estimator trials.
    pub eta: Option<f64>,
    pub queries: u64,
    pub max_depth: u32,
    /// Exact farness from the distance oracle, when it ran.
    pub true_farness: Option<Frac>,
    /// Milliseconds; 0.0 unless the config enables timings.
    pub wall_ms: f64,
}

/// Batch summary. [`aggregate`] recomputes it from the trial rows; the
/// runner's copy always equals that recomputation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub trials: u64,
    /// Fraction of accepting verdicts, over trials that have one.
    pub accept_rate: Option<f64>,
    pub mean_eta: Option<f64>,
    pub mean_queries: f64,
    pub max_queries: u64,
    pub max_depth: u32,
    pub mean_farness: Option<f64>,
    pub mean_wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchReport {
    pub master_seed: u64,
    pub trials: Vec<TrialReport>,
    pub aggregate: Aggregate,
}

/// Per-batch state computed once and shared read-only by every trial.
enum Prep {
    /// Fixed instance: its exact farness, when the target is reachable.
    Instance { far: Option<Frac> },
    /// Distribution draws evaluate against one balancing formula.
    Drawn { f: Formula, n: u64 },
}

fn prepare(task: &Task) -> Result<Prep, HarnessError> {
    match task {
        Task::Test { f, a, params } => {
            let alphabet = f.alphabet();
            let want = if params.b {
                alphabet.one()
            } else {
                alphabet.zero()
            };
            let far = farness(f, a, Target::Value(want))?;
            Ok(Prep::Instance {
                far: far.map(|fr| Frac::new(fr.cost, fr.size)),
            })
        }
        Task::Estimate { f, a, .. } | Task::BasicTest { f, a, .. } => {
            let far = farness(f, a, Target::Accept)?;
            Ok(Prep::Instance {
                far: far.map(|fr| Frac::new(fr.cost, fr.size)),
            })
        }
        Task::Distribution {
            variant, height, ..
        } => {
            let f = build_balancing_formula(*variant, *height)?;
            let n = u64::from(f.n_vars());
            Ok(Prep::Drawn { f, n })
        }
    }
}

fn run_trial(
    config: &ExperimentConfig,
    task: &Task,
    prep: &Prep,
    trial: u64,
    seed: u64,
) -> Result<TrialReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = config.timings.then(Instant::now);
    let far = match prep {
        Prep::Instance { far } => *far,
        Prep::Drawn { .. } => None,
    };
    let mut report = TrialReport {
        trial,
        seed,
        algorithm: "",
        eps: None,
        delta: None,
        verdict: None,
        eta: None,
        queries: 0,
        max_depth: 0,
        true_farness: far,
        wall_ms: 0.0,
    };
    match (task, prep) {
        (Task::Test { f, a, params }, _) => {
            let mut o = CountingOracle::new(a);
            let (verdict, stats) = alg1_test_traced(f, *params, &config.constants, &mut o, &mut rng)?;
            report.algorithm = "alg1";
            report.eps = Some(params.eps);
            report.delta = Some(params.delta);
            report.verdict = Some(verdict);
            report.queries = o.query_count();
            report.max_depth = stats.max_recursion_depth;
        }
        (Task::Estimate { f, a, eps, delta }, _) => {
            let mut o = CountingOracle::new(a);
            let (est, stats) =
                alg2_estimate_traced(f, *eps, *delta, &config.constants, &mut o, &mut rng)?;
            report.algorithm = "alg2";
            report.eps = Some(*eps);
            report.delta = Some(*delta);
            report.eta = Some(est.eta);
            report.queries = est.queries;
            report.max_depth = stats.max_recursion_depth;
        }
        (Task::BasicTest { f, a, eps }, _) => {
            // mirrors the amplified test round by round, keeping per-round
            // depth instrumentation
            let mut o = CountingOracle::new(a);
            let rounds = config.constants.reps(*eps).max(1);
            let mut all = true;
            let mut depth = 0;
            for _ in 0..rounds {
                let (verdict, stats) =
                    alg3_once_traced(f, *eps, &config.constants, &mut o, &mut rng)?;
                all = all && verdict;
                depth = depth.max(stats.max_recursion_depth);
            }
            report.algorithm = "alg3";
            report.eps = Some(*eps);
            report.verdict = Some(all);
            report.queries = o.query_count();
            report.max_depth = depth;
        }
        (Task::Distribution { variant, dist, .. }, Prep::Drawn { f, n }) => {
            let sample = sample_distribution(*dist, f.n_vars().trailing_zeros(), &mut rng)?;
            let a = sample.assignment(variant.alphabet());
            let far = exact_cost(f, &a, Target::Accept)?.map(|cost| Frac::new(cost, *n));
            report.algorithm = "draw";
            report.verdict = far.map(|fr| fr.num == 0);
            report.true_farness = far;
        }
        (Task::Distribution { .. }, Prep::Instance { .. }) => {
            unreachable!("prepare pairs each task with its own prep")
        }
    }
    if let Some(t0) = start {
        report.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    }
    Ok(report)
}

fn collect_seq<F>(runs: u64, f: F) -> Result<Vec<TrialReport>, HarnessError>
where
    F: Fn(u64) -> Result<TrialReport, HarnessError>,
{
    (0..runs).map(f).collect()
}

#[cfg(feature = "parallel")]
fn collect_trials<F>(runs: u64, f: F) -> Result<Vec<TrialReport>, HarnessError>
where
    F: Fn(u64) -> Result<TrialReport, HarnessError> + Send + Sync,
{
    // indexed collect keeps row order equal to the sequential path
    (0..runs).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_trials<F>(runs: u64, f: F) -> Result<Vec<TrialReport>, HarnessError>
where
    F: Fn(u64) -> Result<TrialReport, HarnessError> + Send + Sync,
{
    collect_seq(runs, f)
}

/// Recomputes the batch summary from the trial rows. Means are taken in row
/// order, so equal row lists give bit-equal aggregates.
pub fn aggregate(trials: &[TrialReport]) -> Aggregate {
    let count = trials.len() as u64;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let verdicts: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.verdict.map(|v| f64::from(u8::from(v))))
        .collect();
    let etas: Vec<f64> = trials.iter().filter_map(|t| t.eta).collect();
    let fars: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.true_farness.map(Frac::as_f64))
        .collect();
    let queries: Vec<f64> = trials.iter().map(|t| t.queries as f64).collect();
    let walls: Vec<f64> = trials.iter().map(|t| t.wall_ms).collect();
    Aggregate {
        trials: count,
        accept_rate: (!verdicts.is_empty()).then(|| mean(&verdicts)),
        mean_eta: (!etas.is_empty()).then(|| mean(&etas)),
        mean_queries: if queries.is_empty() { 0.0 } else { mean(&queries) },
        max_queries: trials.iter().map(|t| t.queries).max().unwrap_or(0),
        max_depth: trials.iter().map(|t| t.max_depth).max().unwrap_or(0),
        mean_farness: (!fars.is_empty()).then(|| mean(&fars)),
        mean_wall_ms: if walls.is_empty() { 0.0 } else { mean(&walls) },
    }
}

fn assemble(master_seed: u64, trials: Vec<TrialReport>) -> BatchReport {
    let aggregate = aggregate(&trials);
    BatchReport {
        master_seed,
        trials,
        aggregate,
    }
}

/// Runs `config.trials` seeded trials of the task and summarizes them.
/// Parallel when the `parallel` feature is on, otherwise identical to
/// [`run_batch_seq`].
pub fn run_batch(config: &ExperimentConfig, task: &Task) -> Result<BatchReport, HarnessError> {
    config.validate()?;
    let prep = prepare(task)?;
    let trials = collect_trials(config.trials, |t| {
        run_trial(config, task, &prep, t, trial_seed(config.master_seed, t))
    })?;
    Ok(assemble(config.master_seed, trials))
}

/// Sequential batch runner, available regardless of features.
pub fn run_batch_seq(config: &ExperimentConfig, task: &Task) -> Result<BatchReport, HarnessError> {
    config.validate()?;
    let prep = prepare(task)?;
    let trials = collect_seq(config.trials, |t| {
        run_trial(config, task, &prep, t, trial_seed(config.master_seed, t))
    })?;
    Ok(assemble(config.master_seed, trials))
}

/// Instance families for the query-scaling sweep. The two balanced families
/// keep the all-zero input exactly half-far at every size, so far-assignment
/// generation succeeds at any eps up to 1/2; the deep alternating tree would
/// not (its max farness shrinks as 2^ceil(d/2) / 2^d).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// And of 2-ary Ors over 2^lg variables.
    BalancedAndOr,
    /// Or of two wide Ands over 2^lg variables.
    OrOfAnds,
    RandomBasic,
    RandomKxBasic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::BalancedAndOr => "balanced-and-or",
            Family::OrOfAnds => "or-of-ands",
            Family::RandomBasic => "random-basic",
            Family::RandomKxBasic => "random-kx-basic",
        }
    }

    pub fn parse_name(s: &str) -> Option<Family> {
        [
            Family::BalancedAndOr,
            Family::OrOfAnds,
            Family::RandomBasic,
            Family::RandomKxBasic,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Alg1,
    Alg2,
    Alg3,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Alg1 => "alg1",
            Algo::Alg2 => "alg2",
            Algo::Alg3 => "alg3",
        }
    }

    pub fn parse_name(s: &str) -> Option<Algo> {
        [Algo::Alg1, Algo::Alg2, Algo::Alg3]
            .into_iter()
            .find(|a| a.name() == s)
    }
}

/// One query-scaling sweep: per size, one generated instance with one
/// verified far assignment, run `config.trials` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingSpec {
    pub algo: Algo,
    pub family: Family,
    /// log2 of the variable count for each row.
    pub sizes_log2: Vec<u32>,
    /// Farness bar the generated assignment must meet exactly; also the
    /// tester's epsilon.
    pub eps: Frac,
    pub delta: f64,
    pub k: u32,
    pub max_arity: usize,
    /// Far-assignment search budget per size.
    pub retries: u32,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        ScalingSpec {
            algo: Algo::Alg1,
            family: Family::BalancedAndOr,
            sizes_log2: vec![6, 8, 10],
            eps: Frac::new(1, 4),
            delta: 1.0 / 3.0,
            k: 2,
            max_arity: 4,
            retries: 64,
        }
    }
}

impl ScalingSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::BadConfig(msg));
        if self.sizes_log2.is_empty() {
            return bad("sizes_log2 must name at least one size".into());
        }
        if let Some(&lg) = self.sizes_log2.iter().find(|&&lg| lg > 24) {
            return bad(format!("size 2^{lg} is past any sane test size"));
        }
        let balanced = matches!(self.family, Family::BalancedAndOr | Family::OrOfAnds);
        if balanced && self.sizes_log2.iter().any(|&lg| lg < 2) {
            return bad("balanced families need at least 4 variables (size 2^2)".into());
        }
        if self.eps.den == 0 || self.eps.num == 0 || self.eps.num > self.eps.den {
            return bad(format!("eps must be in (0, 1], got {}", self.eps));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must be in (0, 1), got {}", self.delta));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.max_arity < 2 {
            return bad("max_arity must be at least 2".into());
        }
        if self.retries == 0 {
            return bad("retries must be at least 1".into());
        }
        Ok(())
    }
}

/// One size of a scaling sweep. A row with `far_found` false records that
/// the far-assignment search exhausted its budget; no runs happened.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub log2_size: u32,
    pub n_vars: u32,
    pub vertex_count: u64,
    pub far_found: bool,
    pub farness: Option<Frac>,
    pub runs: u64,
    pub accepts: u64,
    pub mean_eta: Option<f64>,
    pub max_queries: u64,
    pub mean_queries: f64,
    pub max_depth: u32,
}

fn scaling_row(
    config: &ExperimentConfig,
    spec: &ScalingSpec,
    lg: u32,
) -> Result<ScalingRow, HarnessError> {
    let mut gen_rng =
        ChaCha8Rng::seed_from_u64(trial_seed(config.master_seed, GEN_INDEX_BASE + u64::from(lg)));
    let f = match spec.family {
        Family::BalancedAndOr => and_of_or2(1 << (lg - 1)),
        Family::OrOfAnds => or2_of_ands(1 << (lg - 1)),
        Family::RandomBasic => random_basic(1 << lg, spec.max_arity, &mut gen_rng),
        Family::RandomKxBasic => random_kx_basic(1 << lg, spec.k, spec.max_arity, &mut gen_rng),
    };
    let mut row = ScalingRow {
        log2_size: lg,
        n_vars: f.n_vars(),
        vertex_count: f.vertex_count() as u64,
        far_found: false,
        farness: None,
        runs: 0,
        accepts: 0,
        mean_eta: None,
        max_queries: 0,
        mean_queries: 0.0,
        max_depth: 0,
    };
    let Some(a) = find_far_assignment(&f, spec.eps, Target::Accept, spec.retries, &mut gen_rng)?
    else {
        return Ok(row);
    };
    let far = farness(&f, &a, Target::Accept)?.map(|fr| Frac::new(fr.cost, fr.size));
    let task = match spec.algo {
        Algo::Alg1 => Task::Test {
            f: &f,
            a: &a,
            params: TestParams::new(spec.eps.as_f64(), spec.delta, spec.k, true),
        },
        Algo::Alg2 => Task::Estimate {
            f: &f,
            a: &a,
            eps: spec.eps.as_f64(),
            delta: spec.delta,
        },
        Algo::Alg3 => Task::BasicTest {
            f: &f,
            a: &a,
            eps: spec.eps.as_f64(),
        },
    };
    let prep = Prep::Instance { far };
    let trials = collect_trials(config.trials, |r| {
        let seed = trial_seed(config.master_seed, (u64::from(lg) << 32) | r);
        run_trial(config, &task, &prep, r, seed)
    })?;
    let agg = aggregate(&trials);
    row.far_found = true;
    row.farness = far;
    row.runs = agg.trials;
    row.accepts = trials
        .iter()
        .filter(|t| t.verdict == Some(true))
        .count() as u64;
    row.mean_eta = agg.mean_eta;
    row.max_queries = agg.max_queries;
    row.mean_queries = agg.mean_queries;
    row.max_depth = agg.max_depth;
    Ok(row)
}

/// Query-count scaling across instance sizes: per size, generate one
/// instance and one exactly verified far assignment, replay the algorithm
/// `config.trials` times, and tabulate the query counts. Sizes whose far
/// search fails are reported as rows with zero runs rather than dropped.
pub fn query_scaling(
    config: &ExperimentConfig,
    spec: &ScalingSpec,
) -> Result<Vec<ScalingRow>, HarnessError> {
    config.validate()?;
    spec.validate()?;
    spec.sizes_log2
        .iter()
        .map(|&lg| scaling_row(config, spec, lg))
        .collect()
}

/// Empirical indistinguishability sweep: the total variation distance
/// between the two balancing distributions, restricted to the fixed query
/// set {0, 1, 2^(h-1)}, at each height. Sample budget is per height; seeds
/// derive from the config's master seed, so the table reruns byte-identically.
pub fn tv_over_heights(
    config: &ExperimentConfig,
    heights: &[u32],
    samples: u64,
) -> Result<Vec<TvIndistReport>, HarnessError> {
    config.validate()?;
    if heights.is_empty() {
        return Err(HarnessError::BadConfig(
            "heights must name at least one height".into(),
        ));
    }
    heights
        .iter()
        .map(|&h| {
            if h < 2 {
                return Err(LowerBoundError::HeightTooSmall(h).into());
            }
            let qs = [0, 1, 1 << (h - 1)];
            indist_tv(
                &qs,
                h,
                samples,
                trial_seed(config.master_seed, HEIGHT_INDEX_BASE + u64::from(h)),
            )
            .map_err(HarnessError::from)
        })
        .collect()
}

/// Pretty JSON for a batch report. Field order is fixed by declaration and
/// floats print as shortest round-trip decimals, so equal reports give
/// equal bytes.
pub fn batch_to_json(report: &BatchReport) -> String {
    serde_json::to_string_pretty(report).expect("reports hold only plain data")
}

pub fn rows_to_json<T: Serialize>(rows: &[T]) -> String {
    serde_json::to_string_pretty(rows).expect("reports hold only plain data")
}

fn push_opt_f64(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        out.push_str(&v.to_string());
    }
}

fn push_trial_csv(out: &mut String, t: &TrialReport) {
    out.push_str(&format!("{},{},{},", t.trial, t.seed, t.algorithm));
    push_opt_f64(out, t.eps);
    out.push(',');
    push_opt_f64(out, t.delta);
    out.push(',');
    out.push_str(match t.verdict {
        Some(true) => "accept",
        Some(false) => "reject",
        None => "",
    });
    out.push(',');
    push_opt_f64(out, t.eta);
    out.push_str(&format!(",{},{},", t.queries, t.max_depth));
    if let Some(fr) = t.true_farness {
        out.push_str(&format!("{},{}", fr.num, fr.den));
    } else {
        out.push(',');
    }
    out.push_str(&format!(",{}\n", t.wall_ms));
}

/// CSV with one row per trial. Columns:
/// trial,seed,algorithm,eps,delta,verdict,eta,queries,max_depth,farness_num,farness_den,wall_ms
pub fn trials_to_csv(trials: &[TrialReport]) -> String {
    let mut out = String::from(
        "trial,seed,algorithm,eps,delta,verdict,eta,queries,max_depth,farness_num,farness_den,wall_ms\n",
    );
    for t in trials {
        push_trial_csv(&mut out, t);
    }
    out
}

/// Trial rows, a blank line, then a one-row aggregate table.
pub fn batch_to_csv(report: &BatchReport) -> String {
    let mut out = trials_to_csv(&report.trials);
    out.push('\n');
    out.push_str(
        "trials,accept_rate,mean_eta,mean_queries,max_queries,max_depth,mean_farness,mean_wall_ms\n",
    );
    let a = &report.aggregate;
    out.push_str(&format!("{},", a.trials));
    push_opt_f64(&mut out, a.accept_rate);
    out.push(',');
    push_opt_f64(&mut out, a.mean_eta);
    out.push_str(&format!(",{},{},{},", a.mean_queries, a.max_queries, a.max_depth));
    push_opt_f64(&mut out, a.mean_farness);
    out.push_str(&format!(",{}\n", a.mean_wall_ms));
    out
}

/// CSV for a scaling sweep, one row per size.
pub fn scaling_to_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(
        "log2_size,n_vars,vertex_count,far_found,farness_num,farness_den,runs,accepts,mean_eta,max_queries,mean_queries,max_depth\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},",
            r.log2_size, r.n_vars, r.vertex_count, r.far_found
        ));
        if let Some(fr) = r.farness {
            out.push_str(&format!("{},{}", fr.num, fr.den));
        } else {
            out.push(',');
        }
        out.push_str(&format!(",{},{},", r.runs, r.accepts));
        push_opt_f64(&mut out, r.mean_eta);
        out.push_str(&format!(
            ",{},{},{}\n",
            r.max_queries, r.mean_queries, r.max_depth
        ));
    }
    out
}

/// CSV for a height sweep, one row per height.
pub fn tv_to_csv(rows: &[TvIndistReport]) -> String {
    let mut out = String::from("height,queries,samples,tv,bootstrap_se\n");
    for r in rows {
        let qs: Vec<String> = r.queries.iter().map(|q| q.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.height,
            qs.join(";"),
            r.samples,
            r.tv,
            r.bootstrap_se
        ));
    }
    out
}
