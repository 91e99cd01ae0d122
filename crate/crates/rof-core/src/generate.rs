//! Seeded generators for random formulas, structured families, and far
//! assignments. Everything takes the random source explicitly so tests and
//! experiments reproduce from a seed.

use crate::distance::{farness, nearest_satisfying, DistanceError, Target};
use crate::formula::{Assignment, Expr, Formula, GateKind};
use crate::frac::Frac;
use crate::normalize::compute_mdnf;
use rand::seq::SliceRandom;
use rand::Rng;

/// Gate mix for [`random_formula`].
#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub n_vars: u32,
    /// Fan-in cap for And/Or gates and random tables.
    pub max_arity: usize,
    /// Sprinkle negations over leaves and gates.
    pub negations: bool,
    /// Curated unforceable tables (xor, xnor, parity, majority). Safe for
    /// corpora that must survive normalization with their variable set
    /// intact: none of them, nor any restriction of them, ignores a child.
    pub pool_tables: bool,
    /// Fully random truth tables; may be constant or ignore children.
    pub random_tables: bool,
}

const XOR2: &[u8] = &[0, 1, 1, 0];
const XNOR2: &[u8] = &[1, 0, 0, 1];
const MAJ3: &[u8] = &[0, 0, 0, 1, 0, 1, 1, 1];
const PARITY3: &[u8] = &[0, 1, 1, 0, 1, 0, 0, 1];
const PARITY4: &[u8] = &[0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0];

fn pool(arity: usize) -> &'static [&'static [u8]] {
    match arity {
        2 => &[XOR2, XNOR2],
        3 => &[MAJ3, PARITY3],
        4 => &[PARITY4],
        _ => &[],
    }
}

/// A read-once formula over exactly `n_vars` variables with the configured
/// gate mix, stats annotated.
pub fn random_formula(cfg: &GenConfig, rng: &mut impl Rng) -> Formula {
    assert!(cfg.n_vars >= 1 && cfg.max_arity >= 2);
    let mut vars: Vec<u32> = (0..cfg.n_vars).collect();
    vars.shuffle(rng);
    let e = build_mixed(cfg, &vars, rng);
    Formula::from_expr(&e)
        .expect("partitioned variables are read-once by construction")
        .with_stats()
}

fn build_mixed(cfg: &GenConfig, vars: &[u32], rng: &mut impl Rng) -> Expr {
    if vars.len() == 1 {
        let leaf = Expr::var(vars[0]);
        return if cfg.negations && rng.gen_bool(0.25) {
            Expr::not(leaf)
        } else {
            leaf
        };
    }
    let arity = rng.gen_range(2..=cfg.max_arity.min(vars.len()));
    let kids: Vec<Expr> = split_vars(vars, arity, rng)
        .into_iter()
        .map(|p| build_mixed(cfg, p, rng))
        .collect();
    let mut picks: Vec<u8> = vec![0, 1];
    if cfg.pool_tables && !pool(arity).is_empty() {
        picks.push(2);
    }
    if cfg.random_tables {
        picks.push(3);
    }
    let gate = match picks[rng.gen_range(0..picks.len())] {
        0 => Expr::and(kids),
        1 => Expr::or(kids),
        2 => {
            let tables = pool(arity);
            Expr::table(tables[rng.gen_range(0..tables.len())], kids)
        }
        _ => {
            let bits: Vec<u8> = (0..1usize << arity).map(|_| rng.gen_range(0..=1u8)).collect();
            Expr::table(&bits, kids)
        }
    };
    if cfg.negations && rng.gen_bool(0.15) {
        Expr::not(gate)
    } else {
        gate
    }
}

/// Splits a variable slice into `parts` nonempty consecutive chunks at
/// random cut points.
fn split_vars<'a>(vars: &'a [u32], parts: usize, rng: &mut impl Rng) -> Vec<&'a [u32]> {
    debug_assert!(parts >= 1 && parts <= vars.len());
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, vars.len() - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(vars.len());
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for end in cuts {
        out.push(&vars[start..end]);
        start = end;
    }
    out
}

/// An alternating And/Or formula over plain variable leaves (basic form).
pub fn random_basic(n_vars: u32, max_arity: usize, rng: &mut impl Rng) -> Formula {
    assert!(n_vars >= 1 && max_arity >= 2);
    let mut vars: Vec<u32> = (0..n_vars).collect();
    vars.shuffle(rng);
    let e = build_alternating(&vars, rng.gen_bool(0.5), max_arity, rng);
    Formula::from_expr(&e).unwrap().with_stats()
}

fn build_alternating(vars: &[u32], is_and: bool, max_arity: usize, rng: &mut impl Rng) -> Expr {
    if vars.len() == 1 {
        return Expr::var(vars[0]);
    }
    let arity = rng.gen_range(2..=max_arity.min(vars.len()));
    let kids: Vec<Expr> = split_vars(vars, arity, rng)
        .into_iter()
        .map(|p| build_alternating(p, !is_and, max_arity, rng))
        .collect();
    if is_and {
        Expr::and(kids)
    } else {
        Expr::or(kids)
    }
}

/// A k-x-basic formula: alternating And/Or, unforceable table gates of arity
/// up to k, negated leaves.
pub fn random_kx_basic(n_vars: u32, k: u32, max_arity: usize, rng: &mut impl Rng) -> Formula {
    assert!(n_vars >= 1 && max_arity >= 2 && k >= 2);
    let mut vars: Vec<u32> = (0..n_vars).collect();
    vars.shuffle(rng);
    let e = build_kx(&vars, None, k, max_arity, rng);
    let f = Formula::from_expr(&e).unwrap().with_stats();
    debug_assert!(crate::normalize::is_kx_basic(&f, k));
    f
}

// parent: Some(true) under an And, Some(false) under an Or, None elsewhere
fn build_kx(
    vars: &[u32],
    parent: Option<bool>,
    k: u32,
    max_arity: usize,
    rng: &mut impl Rng,
) -> Expr {
    if vars.len() == 1 {
        return if rng.gen_bool(0.25) {
            Expr::nvar(vars[0])
        } else {
            Expr::var(vars[0])
        };
    }
    let mut picks = Vec::new();
    if parent != Some(true) {
        picks.push(0u8);
    }
    if parent != Some(false) {
        picks.push(1);
    }
    let table_arities: Vec<usize> = (2..=(k as usize).min(4).min(vars.len()))
        .filter(|&a| !pool(a).is_empty())
        .collect();
    if !table_arities.is_empty() {
        picks.push(2);
    }
    match picks[rng.gen_range(0..picks.len())] {
        0 => {
            let arity = rng.gen_range(2..=max_arity.min(vars.len()));
            let kids = split_vars(vars, arity, rng)
                .into_iter()
                .map(|p| build_kx(p, Some(true), k, max_arity, rng))
                .collect();
            Expr::and(kids)
        }
        1 => {
            let arity = rng.gen_range(2..=max_arity.min(vars.len()));
            let kids = split_vars(vars, arity, rng)
                .into_iter()
                .map(|p| build_kx(p, Some(false), k, max_arity, rng))
                .collect();
            Expr::or(kids)
        }
        _ => {
            let arity = table_arities[rng.gen_range(0..table_arities.len())];
            let tables = pool(arity);
            let kids = split_vars(vars, arity, rng)
                .into_iter()
                .map(|p| build_kx(p, None, k, max_arity, rng))
                .collect();
            Expr::table(tables[rng.gen_range(0..tables.len())], kids)
        }
    }
}

/// A k-basic formula: alternating And/Or plus majority gates stored as
/// minimal-DNF term sets (for k >= 3; below that, plain basic).
pub fn random_k_basic(n_vars: u32, k: u32, max_arity: usize, rng: &mut impl Rng) -> Formula {
    assert!(n_vars >= 1 && max_arity >= 2 && k >= 2);
    let mut vars: Vec<u32> = (0..n_vars).collect();
    vars.shuffle(rng);
    let e = build_k(&vars, None, k, max_arity, rng);
    let mut f = Formula::from_expr(&e).unwrap();
    let swaps: Vec<_> = f
        .vertices()
        .filter_map(|v| match f.kind(v) {
            GateKind::Table(t) => Some((v, compute_mdnf(t, f.children(v).len()).unwrap())),
            _ => None,
        })
        .collect();
    for (v, terms) in swaps {
        f.replace_kind(v, GateKind::Mdnf(terms));
    }
    let f = f.with_stats();
    debug_assert!(crate::normalize::is_k_basic(&f, k));
    f
}

fn build_k(
    vars: &[u32],
    parent: Option<bool>,
    k: u32,
    max_arity: usize,
    rng: &mut impl Rng,
) -> Expr {
    if vars.len() == 1 {
        return Expr::var(vars[0]);
    }
    let mut picks = Vec::new();
    if parent != Some(true) {
        picks.push(0u8);
    }
    if parent != Some(false) {
        picks.push(1);
    }
    // majority-of-3 is the smallest monotone unforceable gate
    if k >= 3 && vars.len() >= 3 {
        picks.push(2);
    }
    match picks[rng.gen_range(0..picks.len())] {
        0 => {
            let arity = rng.gen_range(2..=max_arity.min(vars.len()));
            let kids = split_vars(vars, arity, rng)
                .into_iter()
                .map(|p| build_k(p, Some(true), k, max_arity, rng))
                .collect();
            Expr::and(kids)
        }
        1 => {
            let arity = rng.gen_range(2..=max_arity.min(vars.len()));
            let kids = split_vars(vars, arity, rng)
                .into_iter()
                .map(|p| build_k(p, Some(false), k, max_arity, rng))
                .collect();
            Expr::or(kids)
        }
        _ => {
            let kids = split_vars(vars, 3, rng)
                .into_iter()
                .map(|p| build_k(p, None, k, max_arity, rng))
                .collect();
            Expr::table(MAJ3, kids)
        }
    }
}

/// And of randomly sized Or chunks (single-variable chunks stay plain
/// leaves) over a shuffled variable order, with an optional mix of negated
/// leaves. Violating one literal per chunk costs one change per chunk, so an
/// assignment at least 1/max_or_arity-far always exists; deep random trees
/// offer no such guarantee, which makes this the generator of choice for
/// far-instance corpora.
pub fn random_and_of_ors(
    n_vars: u32,
    max_or_arity: usize,
    negations: bool,
    rng: &mut impl Rng,
) -> Formula {
    assert!(max_or_arity >= 1 && n_vars as usize > max_or_arity);
    let mut vars: Vec<u32> = (0..n_vars).collect();
    vars.shuffle(rng);
    let mut kids = Vec::new();
    let mut rest = vars.as_slice();
    while !rest.is_empty() {
        let take = rng.gen_range(1..=max_or_arity.min(rest.len()));
        let mut leaves: Vec<Expr> = rest[..take]
            .iter()
            .map(|&i| {
                if negations && rng.gen_bool(0.3) {
                    Expr::nvar(i)
                } else {
                    Expr::var(i)
                }
            })
            .collect();
        kids.push(if leaves.len() == 1 {
            leaves.pop().unwrap()
        } else {
            Expr::or(leaves)
        });
        rest = &rest[take..];
    }
    Formula::from_expr(&Expr::and(kids)).unwrap().with_stats()
}

/// The assignment falsifying every literal leaf: plain variables to zero,
/// negated ones to one. On an [`random_and_of_ors`] output it violates every
/// chunk at once, realizing that generator's farness floor.
pub fn falsifying_assignment(f: &Formula) -> Assignment {
    let mut a = Assignment::from_bits(f.alphabet(), &vec![false; f.n_vars() as usize]);
    for v in f.vertices() {
        if let GateKind::NegVar(i) = f.kind(v) {
            a.set(*i, f.alphabet().one());
        }
    }
    a
}

/// Complete binary tree of alternating And/Or layers (And at the root) over
/// 2^depth variables. `depth` 0 is a single variable leaf.
pub fn balanced_and_or(depth: u32) -> Formula {
    fn build(lo: u32, hi: u32, and_layer: bool) -> Expr {
        if hi - lo == 1 {
            return Expr::var(lo);
        }
        let mid = lo + (hi - lo) / 2;
        let kids = vec![build(lo, mid, !and_layer), build(mid, hi, !and_layer)];
        if and_layer {
            Expr::and(kids)
        } else {
            Expr::or(kids)
        }
    }
    assert!(depth <= 24, "2^{depth} leaves is past any sane test size");
    Formula::from_expr(&build(0, 1 << depth, true))
        .unwrap()
        .with_stats()
}

/// And of `width` 2-ary Ors over 2*width variables. The all-zero assignment
/// is exactly 1/2-far from satisfying.
pub fn and_of_or2(width: u32) -> Formula {
    assert!(width >= 2);
    let kids = (0..width)
        .map(|i| Expr::or(vec![Expr::var(2 * i), Expr::var(2 * i + 1)]))
        .collect();
    Formula::from_expr(&Expr::and(kids)).unwrap().with_stats()
}

/// Or of two `half`-ary Ands over 2*half variables. The all-zero assignment
/// is exactly 1/2-far from satisfying.
pub fn or2_of_ands(half: u32) -> Formula {
    assert!(half >= 2);
    let left = Expr::and((0..half).map(Expr::var).collect());
    let right = Expr::and((half..2 * half).map(Expr::var).collect());
    Formula::from_expr(&Expr::or(vec![left, right]))
        .unwrap()
        .with_stats()
}

/// A satisfying assignment nearest to all-zero, or `None` when the target is
/// unreachable.
pub fn satisfying_assignment(
    f: &Formula,
    target: Target,
) -> Result<Option<Assignment>, DistanceError> {
    let zero = Assignment::from_bits(f.alphabet(), &vec![false; f.n_vars() as usize]);
    nearest_satisfying(f, &zero, target)
}

/// Searches for an assignment whose exact farness from the target is at
/// least `eps`: random biased corruptions of a satisfying assignment, each
/// candidate verified by the distance oracle. `None` after `retries` misses.
pub fn find_far_assignment(
    f: &Formula,
    eps: Frac,
    target: Target,
    retries: u32,
    rng: &mut impl Rng,
) -> Result<Option<Assignment>, DistanceError> {
    let Some(base) = satisfying_assignment(f, target)? else {
        return Ok(None);
    };
    let inputs = f.alphabet().input_symbols();
    for _ in 0..retries {
        let flip_prob = rng.gen_range(0.3..=1.0);
        let zero_bias = rng.gen_range(0.5..=1.0);
        let mut cand = base.clone();
        for i in 0..f.n_vars() {
            if rng.gen_bool(flip_prob) {
                let s = inputs[usize::from(!rng.gen_bool(zero_bias))];
                cand.set(i, s);
            }
        }
        if let Some(far) = farness(f, &cand, target)? {
            if far.at_least(eps) {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Alphabet, Sym};
    use crate::normalize::{is_basic, is_k_basic, is_kx_basic};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn mixed_formulas_use_every_variable_once() {
        for seed in 0..40 {
            let cfg = GenConfig {
                n_vars: 1 + seed % 14,
                max_arity: 4,
                negations: true,
                pool_tables: true,
                random_tables: true,
            };
            let f = random_formula(&cfg, &mut rng(seed.into()));
            let mut vars = f.variables();
            vars.sort_unstable();
            assert_eq!(vars, (0..cfg.n_vars).collect::<Vec<_>>());
        }
    }

    #[test]
    fn same_seed_reproduces_the_formula() {
        let cfg = GenConfig {
            n_vars: 12,
            max_arity: 4,
            negations: true,
            pool_tables: true,
            random_tables: true,
        };
        let a = random_formula(&cfg, &mut rng(7));
        let b = random_formula(&cfg, &mut rng(7));
        assert_eq!(a, b);
    }

    #[test]
    fn structured_generators_satisfy_their_predicates() {
        for seed in 0..30 {
            let n = 2 + seed % 13;
            assert!(is_basic(&random_basic(n, 3, &mut rng(seed.into()))));
            assert!(is_kx_basic(
                &random_kx_basic(n, 3, 3, &mut rng(seed.into())),
                3
            ));
            assert!(is_k_basic(
                &random_k_basic(n, 3, 3, &mut rng(seed.into())),
                3
            ));
            assert!(is_k_basic(
                &random_k_basic(n, 2, 4, &mut rng(seed.into())),
                2
            ));
        }
    }

    #[test]
    fn and_of_ors_always_admits_a_quarter_far_assignment() {
        for seed in 0..30u64 {
            let n = 16 + (seed % 100) as u32 * 4;
            for negations in [false, true] {
                let mut g = rng(seed);
                let f = random_and_of_ors(n, 4, negations, &mut g);
                if negations {
                    assert!(is_kx_basic(&f, 4));
                } else {
                    assert!(is_basic(&f));
                }
                let mut vars = f.variables();
                vars.sort_unstable();
                assert_eq!(vars, (0..n).collect::<Vec<_>>());
                let far = falsifying_assignment(&f);
                assert!(farness(&f, &far, Target::Accept).unwrap().unwrap().at_least(Frac::new(1, 4)));
            }
        }
    }

    #[test]
    fn balanced_families_have_the_expected_shape() {
        let f = and_of_or2(8);
        assert_eq!(f.n_vars(), 16);
        assert!(is_basic(&f));
        let zero = Assignment::from_bits(Alphabet::Bool, &[false; 16]);
        let far = farness(&f, &zero, Target::Value(Sym(1))).unwrap().unwrap();
        assert_eq!((far.cost, far.size), (8, 16));

        let g = or2_of_ands(8);
        assert_eq!(g.n_vars(), 16);
        assert!(is_basic(&g));
        let far = farness(&g, &zero, Target::Value(Sym(1))).unwrap().unwrap();
        assert_eq!((far.cost, far.size), (8, 16));
    }

    #[test]
    fn satisfying_assignments_satisfy() {
        let texts = [
            "(and x0 (or x1 x2))",
            "(tbl2 0110 x0 x1)",
            "(mv2 bal4 (mv2 bal4 x0 x1) (mv2 bal4 x2 x3))",
        ];
        for text in texts {
            let f = crate::formula::parse_formula(text).unwrap().with_stats();
            let target = match f.alphabet() {
                Alphabet::Bool => Target::Value(Sym(1)),
                _ => Target::Accept,
            };
            let a = satisfying_assignment(&f, target).unwrap().unwrap();
            assert!(target.met_by(f.alphabet(), f.evaluate(&a).unwrap()));
        }
    }

    #[test]
    fn far_assignments_verify_at_their_threshold() {
        let eps = Frac { num: 1, den: 4 };
        let one = Target::Value(Sym(1));
        let mut r = rng(11);
        for f in [and_of_or2(8), or2_of_ands(8), random_basic(12, 3, &mut r)] {
            let a = find_far_assignment(&f, eps, one, 200, &mut r)
                .unwrap()
                .expect("structured instances admit far assignments");
            let far = farness(&f, &a, one).unwrap().unwrap();
            assert!(far.at_least(eps));
        }
    }
}
