//! The three randomized testers. Each is implemented line by line from its
//! pseudocode: no short-circuiting of sample loops, no caching, no query
//! reuse, so the observed query counts honestly reflect the algorithms as
//! stated. Every derived sample count and distance schedule comes from a
//! [`Constants`] record, so the instantiation is explicit and overridable.

use crate::formula::{
    classify_children, CountingOracle, Formula, FormulaError, GateKind, Sym, VertexId,
};
use crate::normalize::{is_basic, is_k_basic, is_kx_basic};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TesterError {
    #[error("formula is not {k}-x-basic")]
    NotKxBasic { k: u32 },
    #[error("formula is not {k}-basic")]
    NotKBasic { k: u32 },
    #[error("formula is not basic (And/Or gates over plain variable leaves)")]
    NotBasic,
    #[error("bad test parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// The numeric knobs behind every derived sample count and epsilon schedule.
/// Defaults are the instantiation ledger values. The two optional caps bound
/// the sample loops, whose uncapped values are astronomically conservative
/// (the conjunction sample count at eps 1/4, k 2 is about 5e8).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    /// Coefficient c in the conjunction sample count ceil(c/eps * (4k/eps)^2k * ln(2/delta)).
    pub genand_coeff: f64,
    /// Hard cap on the conjunction sample count, when set.
    pub genand_cap: Option<u64>,
    /// Coefficient c in the estimator sample count ceil(c * eps^-(2k+2) * (4k)^2k * ln(1/delta)).
    pub est_coeff: f64,
    /// Hard cap on the estimator sample count, when set.
    pub est_cap: Option<u64>,
    /// Divisor d in slightly_small(eps) = eps * (1 - (4k/eps)^-k / d).
    pub slightly_small_shrink_div: f64,
    /// Multiplier m in recurse_eps(eps) = eps * (1 + m * (4k/eps)^-k).
    pub recurse_eps_grow_mult: f64,
    /// local_dist(eps) = c * eps; the distance closed by flipping critical leaves.
    pub localdist_coeff: f64,
    /// twice_local_dist(eps) = c * eps; Algorithm 3's recursion parameter.
    pub twicelocaldist_coeff: f64,
    /// mdepth(eps) = ceil(c / eps * ln(3/(2 eps))); depth ceiling for important vertices.
    pub mdepth_coeff: f64,
    /// numrel(eps) = c * eps^-2 * log2(2/eps); relative-count tolerance.
    pub numrel_coeff: f64,
    /// orconst(eps) = ceil(c / eps * ln(6 * numrel(eps))); per-relative repetitions.
    pub orconst_coeff: f64,
    /// reps(eps) = ceil(c / eps); outer repetitions for [`alg3_test`].
    pub reps_coeff: f64,
    /// hitprob(eps) = eps / d; critical-leaf density floor.
    pub hitprob_div: f64,
    /// hhitprob(eps) = eps / d; single-run detection probability floor.
    pub hhitprob_div: f64,
    /// median_reps(delta) = ceil(c * ln(1/delta)); runs behind [`alg2_median`].
    pub median_reps_coeff: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            genand_coeff: 64.0,
            genand_cap: None,
            est_coeff: 1000.0,
            est_cap: None,
            slightly_small_shrink_div: 8.0,
            recurse_eps_grow_mult: 1.0,
            localdist_coeff: 2.0 / 3.0,
            twicelocaldist_coeff: 4.0 / 3.0,
            mdepth_coeff: 3.0,
            numrel_coeff: 1.0,
            orconst_coeff: 6.0,
            reps_coeff: 16.0,
            hitprob_div: 4.0,
            hhitprob_div: 8.0,
            median_reps_coeff: 48.0,
        }
    }
}

impl Constants {
    /// Ledger defaults with both sample loops capped at `n`. Capping keeps
    /// runs feasible and leaves completeness untouched; only the soundness
    /// error grows (a far conjunction slips past 64 samples with probability
    /// under 1e-8 on the instances the empirical checks drive).
    pub fn capped(n: u64) -> Self {
        Constants {
            genand_cap: Some(n),
            est_cap: Some(n),
            ..Constants::default()
        }
    }

    /// The profile the empirical soundness checks run with: caps at 64.
    pub fn desk() -> Self {
        Constants::capped(64)
    }

    /// (4k/eps)^-k, the shrink ratio the epsilon schedules are built from.
    pub fn ratio(&self, eps: f64, k: u32) -> f64 {
        (eps / (4.0 * f64::from(k))).powi(k as i32)
    }

    /// Distance parameter for recursing below a forceful conjunction.
    pub fn slightly_small(&self, eps: f64, k: u32) -> f64 {
        eps * (1.0 - self.ratio(eps, k) / self.slightly_small_shrink_div)
    }

    /// Distance parameter for recursing below a forceful disjunction.
    pub fn slightly_big(&self, eps: f64) -> f64 {
        eps / (1.0 - eps)
    }

    /// Distance parameter for recursing below an unforceable gate.
    pub fn recurse_eps(&self, eps: f64, k: u32) -> f64 {
        eps * (1.0 + self.recurse_eps_grow_mult * self.ratio(eps, k))
    }

    /// Sample count for Algorithm 1's forceful-conjunction branch.
    pub fn genand(&self, eps: f64, delta: f64, k: u32) -> u64 {
        let raw = self.genand_coeff / eps
            * (4.0 * f64::from(k) / eps).powi(2 * k as i32)
            * (2.0 / delta).ln();
        cap(ceil_u64(raw), self.genand_cap)
    }

    /// Sample count for Algorithm 2's conjunction branch.
    pub fn est_samples(&self, eps: f64, delta: f64, k: u32) -> u64 {
        let raw = self.est_coeff
            * eps.powi(-2 * (k as i32) - 2)
            * (4.0 * f64::from(k)).powi(2 * k as i32)
            * (1.0 / delta).ln();
        cap(ceil_u64(raw), self.est_cap)
    }

    pub fn local_dist(&self, eps: f64) -> f64 {
        self.localdist_coeff * eps
    }

    pub fn twice_local_dist(&self, eps: f64) -> f64 {
        self.twicelocaldist_coeff * eps
    }

    /// Depth ceiling: important vertices sit at depth at most 4 * mdepth(eps).
    pub fn mdepth(&self, eps: f64) -> u64 {
        ceil_u64(self.mdepth_coeff / eps * (3.0 / (2.0 * eps)).ln())
    }

    /// Relative-count tolerance; Algorithm 3 gives up past 3 * numrel(eps).
    pub fn numrel(&self, eps: f64) -> f64 {
        self.numrel_coeff / (eps * eps) * (2.0 / eps).log2()
    }

    /// Per-relative repetition count in Algorithm 3.
    pub fn orconst(&self, eps: f64) -> u64 {
        ceil_u64(self.orconst_coeff / eps * (6.0 * self.numrel(eps)).ln())
    }

    /// Outer repetitions for [`alg3_test`].
    pub fn reps(&self, eps: f64) -> u64 {
        ceil_u64(self.reps_coeff / eps)
    }

    /// Critical-leaf density floor among all leaves of an eps-far instance.
    pub fn hitprob(&self, eps: f64) -> f64 {
        eps / self.hitprob_div
    }

    /// Single-run rejection probability floor for [`alg3_once`] on eps-far inputs.
    pub fn hhitprob(&self, eps: f64) -> f64 {
        eps / self.hhitprob_div
    }

    /// Estimator runs whose lower median reaches confidence 1 - delta.
    pub fn median_reps(&self, delta: f64) -> u64 {
        ceil_u64(self.median_reps_coeff * (1.0 / delta).ln())
    }
}

fn ceil_u64(x: f64) -> u64 {
    let c = x.ceil();
    if c >= u64::MAX as f64 {
        u64::MAX
    } else if c <= 0.0 {
        0
    } else {
        c as u64
    }
}

fn cap(n: u64, cap: Option<u64>) -> u64 {
    match cap {
        Some(c) => n.min(c),
        None => n,
    }
}

/// Parameters of one Algorithm 1 invocation: distance eps, confidence delta,
/// the arity bound k the formula is validated against, and the target bit b
/// (the test is for membership in SAT(formula = b)).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TestParams {
    pub eps: f64,
    pub delta: f64,
    pub k: u32,
    pub b: bool,
}

impl TestParams {
    pub fn new(eps: f64, delta: f64, k: u32, b: bool) -> Self {
        TestParams { eps, delta, k, b }
    }

    fn validate(&self) -> Result<(), TesterError> {
        validate_eps(self.eps)?;
        validate_delta(self.delta)?;
        if self.k < 2 {
            return Err(TesterError::BadParams(format!(
                "arity bound k must be at least 2, got {}",
                self.k
            )));
        }
        Ok(())
    }
}

fn validate_eps(eps: f64) -> Result<(), TesterError> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(TesterError::BadParams(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    Ok(())
}

fn validate_delta(delta: f64) -> Result<(), TesterError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TesterError::BadParams(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    Ok(())
}

/// Distance estimate plus the queries it cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub eta: f64,
    pub queries: u64,
}

/// Instrumentation a traced run reports alongside its verdict.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub max_recursion_depth: u32,
}

impl RunStats {
    fn touch(&mut self, depth: u32) {
        self.max_recursion_depth = self.max_recursion_depth.max(depth);
    }
}

/// Smallest arity bound this formula validates against: the largest table or
/// mdnf gate arity, and at least 2.
pub fn inferred_arity_bound(f: &Formula) -> u32 {
    let mut k = 2;
    for v in f.vertices() {
        if matches!(f.kind(v), GateKind::Table(_) | GateKind::Mdnf(_)) {
            k = k.max(f.children(v).len() as u32);
        }
    }
    k
}

/// Algorithm 1: 1-sided test of SAT(formula = b) for k-x-basic formulas.
/// Inputs with value b are accepted with probability 1; inputs eps-far from
/// having value b are rejected with probability at least 1 - delta.
pub fn alg1_test(
    f: &Formula,
    p: TestParams,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<bool, TesterError> {
    Ok(alg1_test_traced(f, p, c, o, rng)?.0)
}

/// As [`alg1_test`], also reporting recursion instrumentation.
pub fn alg1_test_traced(
    f: &Formula,
    p: TestParams,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<(bool, RunStats), TesterError> {
    p.validate()?;
    if !is_kx_basic(f, p.k) {
        return Err(TesterError::NotKxBasic { k: p.k });
    }
    f.stats()?;
    let mut run = Alg1Run {
        f,
        k: p.k,
        c,
        o,
        rng,
        stats: RunStats::default(),
    };
    let verdict = run.rec(f.root(), p.eps, p.delta, p.b, 0)?;
    Ok((verdict, run.stats))
}

struct Alg1Run<'f, 'o, R: ?Sized> {
    f: &'f Formula,
    k: u32,
    c: &'f Constants,
    o: &'f mut CountingOracle<'o>,
    rng: &'f mut R,
    stats: RunStats,
}

impl<R: Rng + ?Sized> Alg1Run<'_, '_, R> {
    fn rec(
        &mut self,
        r: VertexId,
        eps: f64,
        delta: f64,
        b: bool,
        depth: u32,
    ) -> Result<bool, FormulaError> {
        self.stats.touch(depth);
        if eps > 1.0 {
            return Ok(true);
        }
        let f = self.f;
        match f.kind(r) {
            GateKind::Var(x) => return Ok(self.o.query_bool(*x)? == b),
            GateKind::NegVar(x) => return Ok(self.o.query_bool(*x)? != b),
            _ => {}
        }
        let kids = f.children(r);
        let total = f.size_of(r)? as f64;
        let is_and = matches!(f.kind(r), GateKind::And);
        let is_or = matches!(f.kind(r), GateKind::Or);
        if (is_and && b) || (is_or && !b) {
            // target forces every child; sample children weighted by size
            let l = self.c.genand(eps, delta, self.k);
            let e2 = self.c.slightly_small(eps, self.k);
            let d2 = delta / 2.0;
            let mut y = true;
            for _ in 0..l {
                let u = f.weighted_child_sample(r, self.rng)?;
                let res = self.rec(u, e2, d2, b, depth + 1)?;
                y = y && res;
            }
            return Ok(y);
        }
        if is_and || is_or {
            // any single child can force the target
            for &u in kids {
                if (f.size_of(u)? as f64) < eps * total {
                    return Ok(true);
                }
            }
            let e2 = self.c.slightly_big(eps);
            let d2 = eps * delta / 2.0;
            let mut y = false;
            for &u in kids {
                let res = self.rec(u, e2, d2, b, depth + 1)?;
                y = y || res;
            }
            return Ok(y);
        }
        // unforceable gate: test every child for both values, then look for
        // a consistent input string that makes the gate output b
        for &u in kids {
            if (f.size_of(u)? as f64) >= (1.0 - eps) * total {
                return Ok(true);
            }
        }
        let arity = kids.len();
        let e2 = self.c.recurse_eps(eps, self.k);
        let d2 = delta / (2.0 * arity as f64);
        let mut y0 = Vec::with_capacity(arity);
        let mut y1 = Vec::with_capacity(arity);
        for &u in kids {
            y0.push(self.rec(u, e2, d2, false, depth + 1)?);
            y1.push(self.rec(u, e2, d2, true, depth + 1)?);
        }
        for x in 0..1usize << arity {
            let output = match f.kind(r) {
                GateKind::Table(t) => t[x] == Sym(1),
                GateKind::Mdnf(terms) => terms.iter().any(|t| t.iter().all(|&p| x >> p & 1 == 1)),
                _ => unreachable!("leaf, and, and or kinds were handled above"),
            };
            let consistent =
                (0..arity).all(|i| if x >> i & 1 == 1 { y1[i] } else { y0[i] });
            if output == b && consistent {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Algorithm 2: distance estimator for monotone k-basic formulas. With
/// probability at least 1 - delta the result is within eps of the true
/// farness, and a satisfying input yields exactly 0 on every run.
pub fn alg2_estimate(
    f: &Formula,
    eps: f64,
    delta: f64,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<EstimateResult, TesterError> {
    Ok(alg2_estimate_traced(f, eps, delta, c, o, rng)?.0)
}

/// As [`alg2_estimate`], also reporting recursion instrumentation.
pub fn alg2_estimate_traced(
    f: &Formula,
    eps: f64,
    delta: f64,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<(EstimateResult, RunStats), TesterError> {
    validate_eps(eps)?;
    validate_delta(delta)?;
    let k = validate_k_basic(f)?;
    let start = o.query_count();
    let mut run = Alg2Run {
        f,
        k,
        c,
        o,
        rng,
        stats: RunStats::default(),
    };
    // exact in real arithmetic; the clamp only absorbs float rounding
    let eta = run.rec(f.root(), eps, delta, 0)?.clamp(0.0, 1.0);
    let queries = run.o.query_count() - start;
    Ok((EstimateResult { eta, queries }, run.stats))
}

/// Runs the estimator ceil(48 ln(1/delta)) times at confidence 2/3 and takes
/// the lower median, trading confidence for a logarithmic repetition count.
pub fn alg2_median(
    f: &Formula,
    eps: f64,
    delta: f64,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<EstimateResult, TesterError> {
    validate_eps(eps)?;
    validate_delta(delta)?;
    let k = validate_k_basic(f)?;
    let n = c.median_reps(delta).max(1);
    let start = o.query_count();
    let mut run = Alg2Run {
        f,
        k,
        c,
        o,
        rng,
        stats: RunStats::default(),
    };
    let mut etas = Vec::with_capacity(n as usize);
    for _ in 0..n {
        etas.push(run.rec(f.root(), eps, 1.0 / 3.0, 0)?.clamp(0.0, 1.0));
    }
    etas.sort_by(f64::total_cmp);
    let eta = etas[(etas.len() - 1) / 2];
    let queries = run.o.query_count() - start;
    Ok(EstimateResult { eta, queries })
}

fn validate_k_basic(f: &Formula) -> Result<u32, TesterError> {
    let k = inferred_arity_bound(f);
    if !is_k_basic(f, k) {
        return Err(TesterError::NotKBasic { k });
    }
    f.stats()?;
    Ok(k)
}

struct Alg2Run<'f, 'o, R: ?Sized> {
    f: &'f Formula,
    k: u32,
    c: &'f Constants,
    o: &'f mut CountingOracle<'o>,
    rng: &'f mut R,
    stats: RunStats,
}

impl<R: Rng + ?Sized> Alg2Run<'_, '_, R> {
    fn rec(&mut self, r: VertexId, eps: f64, delta: f64, depth: u32) -> Result<f64, FormulaError> {
        self.stats.touch(depth);
        let f = self.f;
        // a leaf answers before any other check and costs its one query
        if let GateKind::Var(x) = f.kind(r) {
            return Ok(if self.o.query_bool(*x)? { 0.0 } else { 1.0 });
        }
        if eps > 1.0 {
            return Ok(0.0);
        }
        let kids = f.children(r);
        let total = f.size_of(r)? as f64;
        if matches!(f.kind(r), GateKind::Or) {
            // a child this small can be rewritten wholesale, so 0 is within eps
            for &u in kids {
                if (f.size_of(u)? as f64) < eps * total {
                    return Ok(0.0);
                }
            }
        }
        if matches!(f.kind(r), GateKind::And) {
            let l = self.c.est_samples(eps, delta, self.k);
            let e2 = self.c.slightly_small(eps, self.k);
            let d2 = delta * eps * self.c.ratio(eps, self.k) / 16.0;
            let mut sum = 0.0;
            for _ in 0..l {
                let u = f.weighted_child_sample(r, self.rng)?;
                sum += self.rec(u, e2, d2, depth + 1)?;
            }
            return Ok(sum / l as f64);
        }
        // Or or mdnf gate: estimate the heavy children, zero the light ones,
        // then price every minimal way of forcing the gate to 1
        let cls = classify_children(f, r, eps, self.k)?;
        let mut alpha = vec![0.0; kids.len()];
        let e2 = self.c.recurse_eps(eps, self.k);
        let d2 = delta / f64::from(self.k).max(1.0 / eps);
        for &u in &cls.heavy {
            let pos = kids.iter().position(|&w| w == u).expect("heavy child of r");
            alpha[pos] = self.rec(u, e2, d2, depth + 1)?;
        }
        let mut best = f64::INFINITY;
        match f.kind(r) {
            GateKind::Or => {
                for (pos, &u) in kids.iter().enumerate() {
                    best = best.min(alpha[pos] * f.size_of(u)? as f64 / total);
                }
            }
            GateKind::Mdnf(terms) => {
                for term in terms {
                    let mut acc = 0.0;
                    for &p in term {
                        let pos = p as usize;
                        acc += alpha[pos] * f.size_of(kids[pos])? as f64 / total;
                    }
                    best = best.min(acc);
                }
            }
            _ => unreachable!("k-basic gates are var, and, or, and mdnf"),
        }
        Ok(best)
    }
}

/// Algorithm 3: one round of the quasi-polynomial test for basic formulas.
/// Satisfying inputs return 1 on every run; eps-far inputs return 0 with
/// probability at least hhitprob(eps) = eps/8.
pub fn alg3_once(
    f: &Formula,
    eps: f64,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<bool, TesterError> {
    Ok(alg3_once_traced(f, eps, c, o, rng)?.0)
}

/// As [`alg3_once`], also reporting recursion instrumentation.
pub fn alg3_once_traced(
    f: &Formula,
    eps: f64,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<(bool, RunStats), TesterError> {
    validate_basic(f, eps)?;
    let mut run = Alg3Run {
        f,
        c,
        o,
        rng,
        stats: RunStats::default(),
    };
    let verdict = run.rec(f.root(), eps, 0)?;
    Ok((verdict, run.stats))
}

/// Runs [`alg3_once`] reps(eps) times and rejects iff any round rejects,
/// amplifying the detection probability to at least 2/3.
pub fn alg3_test(
    f: &Formula,
    eps: f64,
    c: &Constants,
    o: &mut CountingOracle,
    rng: &mut impl Rng,
) -> Result<bool, TesterError> {
    validate_basic(f, eps)?;
    let n = c.reps(eps).max(1);
    let mut run = Alg3Run {
        f,
        c,
        o,
        rng,
        stats: RunStats::default(),
    };
    let mut all = true;
    for _ in 0..n {
        let verdict = run.rec(f.root(), eps, 0)?;
        all = all && verdict;
    }
    Ok(all)
}

fn validate_basic(f: &Formula, eps: f64) -> Result<(), TesterError> {
    validate_eps(eps)?;
    if !is_basic(f) {
        return Err(TesterError::NotBasic);
    }
    f.stats()?;
    Ok(())
}

struct Alg3Run<'f, 'o, R: ?Sized> {
    f: &'f Formula,
    c: &'f Constants,
    o: &'f mut CountingOracle<'o>,
    rng: &'f mut R,
    stats: RunStats,
}

impl<R: Rng + ?Sized> Alg3Run<'_, '_, R> {
    fn rec(&mut self, r: VertexId, eps: f64, depth: u32) -> Result<bool, FormulaError> {
        self.stats.touch(depth);
        if eps > 1.0 {
            return Ok(true);
        }
        let f = self.f;
        if let GateKind::Var(x) = f.kind(r) {
            return Ok(self.o.query_bool(*x)?);
        }
        let leaves = f.subtree_var_leaves(r)?;
        let s = leaves[self.rng.gen_range(0..leaves.len())];
        let relatives = f.or_ancestor_relatives(s, r)?;
        if relatives.len() as f64 > 3.0 * self.c.numrel(eps) {
            return Ok(true);
        }
        let e2 = self.c.twice_local_dist(eps);
        let reps = self.c.orconst(eps);
        let mut any_relative = false;
        for &u in &relatives {
            let mut y = true;
            for _ in 0..reps {
                let res = self.rec(u, e2, depth + 1)?;
                y = y && res;
            }
            any_relative = any_relative || y;
        }
        let GateKind::Var(x) = f.kind(s) else {
            unreachable!("sampled leaf holds a variable")
        };
        Ok(self.o.query_bool(*x)? || any_relative)
    }
}
