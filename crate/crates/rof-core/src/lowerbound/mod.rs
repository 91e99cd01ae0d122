//! Lower-bound laboratory: full binary formulas built from one balancing gate
//! over a 4- or 5-symbol alphabet, the paired input distributions that are
//! hard to tell apart with few queries, and the experiments that measure
//! indistinguishability and farness.

use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distance::{exact_cost, DistanceError, Target};
use crate::formula::{Alphabet, Assignment, Expr, Formula, FormulaError, MvGate, Sym};
use crate::frac::Frac;
use crate::harness::trial_seed;

/// Heights past this build formulas too large to be useful here.
pub const MAX_HEIGHT: u32 = 24;

/// Exact-mode reports enumerate all 2^|Q| query outcomes, so |Q| stays small.
pub const EXACT_QUERY_LIMIT: usize = 6;

#[derive(Debug, Error)]
pub enum LowerBoundError {
    #[error("balancing formulas need height at least 2, got {0}")]
    HeightTooSmall(u32),
    #[error("height {got} exceeds the supported maximum {max}")]
    HeightTooLarge { got: u32, max: u32 },
    #[error("symbol index {sym} is not in the {alphabet} alphabet")]
    SymbolOutsideAlphabet { sym: u8, alphabet: &'static str },
    #[error("assignment length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("query index {query} is out of range for height {height}")]
    QueryOutOfRange { query: u32, height: u32 },
    #[error("need between 1 and {max} distinct queries, got {got}")]
    BadQueryCount { got: usize, max: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Which of the two paired input distributions to draw from. Both pick one
/// transition level k uniformly from 2..=h and fill each level-k block with
/// constant runs; they differ in the run patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    /// Satisfying inputs: each block is two constant halves, (0,1) or (1,0).
    Dy,
    /// Far inputs: each block is four constant quarters, a rotation of
    /// (1,0,0,0) or of (0,1,1,1).
    Dn,
}

impl Dist {
    pub fn name(self) -> &'static str {
        match self {
            Dist::Dy => "dy",
            Dist::Dn => "dn",
        }
    }

    pub fn parse_name(s: &str) -> Option<Dist> {
        match s {
            "dy" => Some(Dist::Dy),
            "dn" => Some(Dist::Dn),
            _ => None,
        }
    }
}

/// The 8 equiprobable quarter patterns of `Dn`: the four rotations of
/// (1,0,0,0) followed by the four rotations of (0,1,1,1).
const DN_PATTERNS: [[u8; 4]; 8] = [
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
    [0, 1, 1, 1],
    [1, 0, 1, 1],
    [1, 1, 0, 1],
    [1, 1, 1, 0],
];

/// One draw from `Dy` or `Dn`. `bits` is fully determined by
/// `(dist, height, k, blocks)` via the constant-run expansion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundSample {
    pub dist: Dist,
    pub height: u32,
    /// Chosen transition level; leaves sit at level 0.
    pub k: u32,
    /// Per-block tuples in block order: (y0,y1) pairs for `Dy`, quarter
    /// quadruples for `Dn`.
    pub blocks: Vec<Vec<u8>>,
    pub bits: Vec<bool>,
}

impl LowerBoundSample {
    /// The sample as an assignment over the given alphabet's 0/1 symbols.
    pub fn assignment(&self, alphabet: Alphabet) -> Assignment {
        Assignment::from_bits(alphabet, &self.bits)
    }

    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

fn check_height(h: u32) -> Result<(), LowerBoundError> {
    if h < 2 {
        return Err(LowerBoundError::HeightTooSmall(h));
    }
    if h > MAX_HEIGHT {
        return Err(LowerBoundError::HeightTooLarge {
            got: h,
            max: MAX_HEIGHT,
        });
    }
    Ok(())
}

/// Applies the variant's gate to two symbols, rejecting symbols outside its
/// alphabet before they can index the gate table.
pub fn balancing_gate(variant: MvGate, a: Sym, b: Sym) -> Result<Sym, LowerBoundError> {
    let alphabet = variant.alphabet();
    for s in [a, b] {
        if s.0 as usize >= alphabet.size() {
            return Err(LowerBoundError::SymbolOutsideAlphabet {
                sym: s.0,
                alphabet: alphabet.label(),
            });
        }
    }
    Ok(variant.output(a, b))
}

/// Full binary tree of height `h`: 2^h variable leaves in index order and the
/// variant's gate at every internal vertex. An input is accepted when the
/// root lands in the alphabet's accept set.
pub fn build_balancing_formula(variant: MvGate, h: u32) -> Result<Formula, LowerBoundError> {
    check_height(h)?;
    fn build(gate: MvGate, lo: u32, hi: u32) -> Expr {
        if hi - lo == 1 {
            return Expr::var(lo);
        }
        let mid = lo + (hi - lo) / 2;
        Expr::Mv(gate, vec![build(gate, lo, mid), build(gate, mid, hi)])
    }
    Ok(Formula::from_expr(&build(variant, 0, 1u32 << h))?.with_stats())
}

/// Whether every aligned block of the bit string is all-0, all-1, or exactly
/// half 1s; checked for every block length 2^k, 0 < k <= h. Equivalent to
/// 4-valued acceptance (the root avoiding F).
pub fn interval_property_check(bits: &[bool]) -> Result<bool, LowerBoundError> {
    let n = bits.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(LowerBoundError::NotPowerOfTwo(n));
    }
    let h = n.trailing_zeros();
    for k in 1..=h {
        let len = 1usize << k;
        for block in bits.chunks_exact(len) {
            let ones = block.iter().filter(|&&b| b).count();
            if ones != 0 && ones != len && ones * 2 != len {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn expand_blocks(dist: Dist, h: u32, k: u32, blocks: &[Vec<u8>]) -> Vec<bool> {
    let run = match dist {
        Dist::Dy => 1usize << (k - 1),
        Dist::Dn => 1usize << (k - 2),
    };
    let mut bits = Vec::with_capacity(1 << h);
    for tuple in blocks {
        for &t in tuple {
            bits.extend(std::iter::repeat(t == 1).take(run));
        }
    }
    bits
}

/// Draws one sample: a uniform level k in 2..=h, then an independent tuple
/// per level-k block, expanded to constant runs.
pub fn sample_distribution(
    dist: Dist,
    h: u32,
    rng: &mut impl Rng,
) -> Result<LowerBoundSample, LowerBoundError> {
    check_height(h)?;
    let k = rng.gen_range(2..=h);
    let n_blocks = 1usize << (h - k);
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        blocks.push(match dist {
            Dist::Dy => {
                if rng.gen::<bool>() {
                    vec![0, 1]
                } else {
                    vec![1, 0]
                }
            }
            Dist::Dn => DN_PATTERNS[rng.gen_range(0..DN_PATTERNS.len())].to_vec(),
        });
    }
    let bits = expand_blocks(dist, h, k, &blocks);
    Ok(LowerBoundSample {
        dist,
        height: h,
        k,
        blocks,
        bits,
    })
}

/// Levels (leaves at 0) of the lowest common ancestors of all query pairs.
/// For leaves i and j the LCA level is the bit length of i XOR j, so |H| is
/// always below |Q|.
pub fn lca_level_set(queries: &[u32], h: u32) -> Result<BTreeSet<u32>, LowerBoundError> {
    if h > MAX_HEIGHT {
        return Err(LowerBoundError::HeightTooLarge {
            got: h,
            max: MAX_HEIGHT,
        });
    }
    for &q in queries {
        if (q as u64) >= (1u64 << h) {
            return Err(LowerBoundError::QueryOutOfRange {
                query: q,
                height: h,
            });
        }
    }
    let mut qs = queries.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let mut levels = BTreeSet::new();
    for (i, &q) in qs.iter().enumerate() {
        for &r in &qs[i + 1..] {
            levels.insert(32 - (q ^ r).leading_zeros());
        }
    }
    Ok(levels)
}

fn checked_queries(queries: &[u32], h: u32) -> Result<Vec<u32>, LowerBoundError> {
    for &q in queries {
        if (q as u64) >= (1u64 << h) {
            return Err(LowerBoundError::QueryOutOfRange {
                query: q,
                height: h,
            });
        }
    }
    let mut qs = queries.to_vec();
    qs.sort_unstable();
    qs.dedup();
    if qs.is_empty() || qs.len() > EXACT_QUERY_LIMIT {
        return Err(LowerBoundError::BadQueryCount {
            got: qs.len(),
            max: EXACT_QUERY_LIMIT,
        });
    }
    Ok(qs)
}

/// Exact outcome distribution of the queries at a fixed level k. Outcome
/// index: bit j is set when the j-th query (ascending) reads 1. Factors over
/// the level-k blocks, which draw their tuples independently.
fn outcome_dist(dist: Dist, k: u32, qs: &[u32]) -> Vec<Rational64> {
    let bins = 1usize << qs.len();
    let mut acc = vec![Rational64::zero(); bins];
    acc[0] = Rational64::new(1, 1);
    let mut start = 0;
    while start < qs.len() {
        let block = qs[start] >> k;
        let mut end = start + 1;
        while end < qs.len() && qs[end] >> k == block {
            end += 1;
        }
        let tuples: &[&[u8]] = match dist {
            Dist::Dy => &[&[0, 1], &[1, 0]],
            Dist::Dn => &[
                &DN_PATTERNS[0],
                &DN_PATTERNS[1],
                &DN_PATTERNS[2],
                &DN_PATTERNS[3],
                &DN_PATTERNS[4],
                &DN_PATTERNS[5],
                &DN_PATTERNS[6],
                &DN_PATTERNS[7],
            ],
        };
        let p = Rational64::new(1, tuples.len() as i64);
        let mut produced = Vec::with_capacity(tuples.len());
        for t in tuples {
            let mut mask = 0usize;
            for (j, &q) in qs[start..end].iter().enumerate() {
                let slot = match dist {
                    Dist::Dy => ((q >> (k - 1)) & 1) as usize,
                    Dist::Dn => ((q >> (k - 2)) & 3) as usize,
                };
                if t[slot] == 1 {
                    mask |= 1 << (start + j);
                }
            }
            produced.push((mask, p));
        }
        let mut next = vec![Rational64::zero(); bins];
        for (i, v) in acc.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for &(mask, q) in &produced {
                next[i | mask] += *v * q;
            }
        }
        acc = next;
        start = end;
    }
    acc
}

/// Exact conditional indistinguishability of the two distributions on a query
/// set. A level k is admissible when neither k nor k-1 is an LCA level of the
/// queries; on admissible levels the conditional outcome distributions must
/// coincide exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactIndistReport {
    pub height: u32,
    /// Sorted, deduplicated.
    pub queries: Vec<u32>,
    pub lca_levels: Vec<u32>,
    pub admissible_levels: Vec<u32>,
    /// Admissible levels whose conditional distributions differ; empty in a
    /// passing run.
    pub mismatched_levels: Vec<u32>,
    pub all_match: bool,
    /// Exact total variation distance between the unconditional outcome
    /// distributions (level averaged out).
    pub unconditional_tv: f64,
    /// 2|Q|/(h-1), the conditioning bound the unconditional TV must respect.
    pub tv_bound: f64,
}

pub fn indist_exact(queries: &[u32], h: u32) -> Result<ExactIndistReport, LowerBoundError> {
    check_height(h)?;
    let qs = checked_queries(queries, h)?;
    let lca = lca_level_set(&qs, h)?;
    let bins = 1usize << qs.len();
    let weight = Rational64::new(1, (h - 1) as i64);
    let mut dy_total = vec![Rational64::zero(); bins];
    let mut dn_total = vec![Rational64::zero(); bins];
    let mut admissible = Vec::new();
    let mut mismatched = Vec::new();
    for k in 2..=h {
        let dy = outcome_dist(Dist::Dy, k, &qs);
        let dn = outcome_dist(Dist::Dn, k, &qs);
        if !lca.contains(&k) && !lca.contains(&(k - 1)) {
            admissible.push(k);
            if dy != dn {
                mismatched.push(k);
            }
        }
        for (i, (y, n)) in dy.iter().zip(&dn).enumerate() {
            dy_total[i] += weight * y;
            dn_total[i] += weight * n;
        }
    }
    let mut gap = Rational64::zero();
    for (y, n) in dy_total.iter().zip(&dn_total) {
        gap += (y - n).abs();
    }
    let tv = gap / 2;
    let all_match = mismatched.is_empty();
    Ok(ExactIndistReport {
        height: h,
        tv_bound: 2.0 * qs.len() as f64 / (h - 1) as f64,
        queries: qs,
        lca_levels: lca.into_iter().collect(),
        admissible_levels: admissible,
        mismatched_levels: mismatched,
        all_match,
        unconditional_tv: tv.to_f64().unwrap_or(f64::NAN),
    })
}

/// One sampled outcome mask of the queries, drawing only the blocks they
/// touch. Distributionally identical to expanding a full sample and reading
/// the query positions.
fn sampled_outcome(dist: Dist, k: u32, qs: &[u32], rng: &mut impl Rng) -> usize {
    let mut mask = 0usize;
    let mut pos = 0;
    while pos < qs.len() {
        let block = qs[pos] >> k;
        let tuple: [u8; 4] = match dist {
            Dist::Dy => {
                if rng.gen::<bool>() {
                    [0, 1, 0, 0]
                } else {
                    [1, 0, 0, 0]
                }
            }
            Dist::Dn => DN_PATTERNS[rng.gen_range(0..DN_PATTERNS.len())],
        };
        while pos < qs.len() && qs[pos] >> k == block {
            let slot = match dist {
                Dist::Dy => ((qs[pos] >> (k - 1)) & 1) as usize,
                Dist::Dn => ((qs[pos] >> (k - 2)) & 3) as usize,
            };
            if tuple[slot] == 1 {
                mask |= 1 << pos;
            }
            pos += 1;
        }
    }
    mask
}

fn counts_tv(dy: &[u64], dn: &[u64], n: u64) -> f64 {
    let gap: f64 = dy
        .iter()
        .zip(dn)
        .map(|(&y, &m)| (y as f64 - m as f64).abs())
        .sum();
    gap / (2.0 * n as f64)
}

const BOOTSTRAP_REPS: usize = 100;

fn resample(prefix: &[u64], n: u64, bins: usize, rng: &mut impl Rng) -> Vec<u64> {
    let mut out = vec![0u64; bins];
    for _ in 0..n {
        let x = rng.gen_range(0..n);
        out[prefix.partition_point(|&c| c <= x)] += 1;
    }
    out
}

fn bootstrap_se(dy: &[u64], dn: &[u64], n: u64, rng: &mut impl Rng) -> f64 {
    let cumulative = |cs: &[u64]| {
        let mut acc = 0;
        cs.iter()
            .map(|&c| {
                acc += c;
                acc
            })
            .collect::<Vec<u64>>()
    };
    let dy_prefix = cumulative(dy);
    let dn_prefix = cumulative(dn);
    let mut tvs = Vec::with_capacity(BOOTSTRAP_REPS);
    for _ in 0..BOOTSTRAP_REPS {
        let rdy = resample(&dy_prefix, n, dy.len(), rng);
        let rdn = resample(&dn_prefix, n, dn.len(), rng);
        tvs.push(counts_tv(&rdy, &rdn, n));
    }
    let mean = tvs.iter().sum::<f64>() / tvs.len() as f64;
    let var = tvs.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (tvs.len() - 1) as f64;
    var.sqrt()
}

/// Empirical total variation distance between the unconditional outcome
/// distributions on a query set, estimated from per-distribution samples with
/// a bootstrap standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvIndistReport {
    pub height: u32,
    /// Sorted, deduplicated.
    pub queries: Vec<u32>,
    /// Draws per distribution.
    pub samples: u64,
    /// Histogram index: bit j set when the j-th query (ascending) read 1.
    pub dy_counts: Vec<u64>,
    pub dn_counts: Vec<u64>,
    pub tv: f64,
    pub bootstrap_se: f64,
}

pub fn indist_tv(
    queries: &[u32],
    h: u32,
    samples: u64,
    master_seed: u64,
) -> Result<TvIndistReport, LowerBoundError> {
    check_height(h)?;
    let qs = checked_queries(queries, h)?;
    let samples = samples.max(1);
    let bins = 1usize << qs.len();
    let mut dy_counts = vec![0u64; bins];
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master_seed, 0));
    for _ in 0..samples {
        let k = rng.gen_range(2..=h);
        dy_counts[sampled_outcome(Dist::Dy, k, &qs, &mut rng)] += 1;
    }
    let mut dn_counts = vec![0u64; bins];
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master_seed, 1));
    for _ in 0..samples {
        let k = rng.gen_range(2..=h);
        dn_counts[sampled_outcome(Dist::Dn, k, &qs, &mut rng)] += 1;
    }
    let tv = counts_tv(&dy_counts, &dn_counts, samples);
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master_seed, 2));
    let se = bootstrap_se(&dy_counts, &dn_counts, samples, &mut rng);
    Ok(TvIndistReport {
        height: h,
        queries: qs,
        samples,
        dy_counts,
        dn_counts,
        tv,
        bootstrap_se: se,
    })
}

/// The relative-distance bar a `Dn` draw is expected to clear against the
/// variant's accept set; `Dy` draws satisfy, so their bar is zero.
pub fn farness_threshold(variant: MvGate, dist: Dist) -> Frac {
    match (variant, dist) {
        (_, Dist::Dy) => Frac::new(0, 1),
        (MvGate::Bal4, Dist::Dn) => Frac::new(1, 4),
        (MvGate::Bal5, Dist::Dn) => Frac::new(1, 12),
    }
}

/// Distance statistics of sampled inputs against a balancing formula's accept
/// set, with exact per-sample distances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarnessReport {
    pub variant: MvGate,
    pub dist: Dist,
    pub height: u32,
    pub trials: u64,
    /// Change count a sample must reach to clear the variant's farness bar.
    pub threshold: u64,
    pub min_distance: u64,
    pub max_distance: u64,
    pub mean_distance: f64,
    pub fraction_at_threshold: f64,
}

/// Draws `trials` samples (per-trial seeds derived from `master_seed`, so any
/// trial can be replayed alone) and measures each one's exact distance.
pub fn farness_experiment(
    variant: MvGate,
    dist: Dist,
    h: u32,
    trials: u64,
    master_seed: u64,
) -> Result<FarnessReport, LowerBoundError> {
    let f = build_balancing_formula(variant, h)?;
    let n = 1u64 << h;
    let bar = farness_threshold(variant, dist);
    let threshold = (n * bar.num).div_ceil(bar.den);
    let trials = trials.max(1);
    let mut min = u64::MAX;
    let mut max = 0u64;
    let mut sum = 0u128;
    let mut hits = 0u64;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master_seed, t));
        let sample = sample_distribution(dist, h, &mut rng)?;
        let a = sample.assignment(variant.alphabet());
        // the all-zeros input is always accepting, so a fix always exists
        let d = exact_cost(&f, &a, Target::Accept)?.expect("accept set reachable");
        min = min.min(d);
        max = max.max(d);
        sum += u128::from(d);
        if d >= threshold {
            hits += 1;
        }
    }
    Ok(FarnessReport {
        variant,
        dist,
        height: h,
        trials,
        threshold,
        min_distance: min,
        max_distance: max,
        mean_distance: sum as f64 / trials as f64,
        fraction_at_threshold: hits as f64 / trials as f64,
    })
}
