//! Exact distance from an assignment to the set of satisfying assignments.
//!
//! The workhorse is a bottom-up dynamic program over the gate arena: for
//! every vertex and every alphabet symbol, the minimum number of variable
//! changes that makes the subformula evaluate to that symbol. A position may
//! keep its current symbol for free or move to one of the two input symbols
//! at cost one. `brute_force_distance` recomputes the same quantity by full
//! enumeration and serves as the independent ground-truth oracle.

use crate::formula::{
    mdnf_to_table, Alphabet, Assignment, Formula, FormulaError, GateKind, Sym, VertexId,
};
use crate::frac::Frac;
use crate::normalize::is_basic;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentinel for unreachable targets; chosen so two of them still add without
/// wrapping.
pub const INF: u64 = u64::MAX / 2;

const MAX_BRUTE_VARS: u32 = 20;
const MAX_BRUTE_COMBINATIONS: u128 = 1 << 22;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("instance too large for brute-force enumeration ({n} variables)")]
    TooLarge { n: u32 },
    #[error("critical vertices are defined for basic formulas only")]
    NotBasic,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// What the root must evaluate to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Value(Sym),
    /// Any symbol in the alphabet's accept set.
    Accept,
}

impl Target {
    fn validate(self, alphabet: Alphabet) -> Result<(), DistanceError> {
        if let Target::Value(s) = self {
            if s.0 as usize >= alphabet.size() {
                return Err(FormulaError::BadSymbol(s.0).into());
            }
        }
        Ok(())
    }

    /// Whether an output symbol meets this target.
    pub fn met_by(self, alphabet: Alphabet, s: Sym) -> bool {
        match self {
            Target::Value(t) => s == t,
            Target::Accept => alphabet.accept_set().contains(&s),
        }
    }
}

fn add(a: u64, b: u64) -> u64 {
    (a + b).min(INF)
}

/// Per-vertex, per-symbol minimum change counts.
pub struct CostTable {
    alphabet: Alphabet,
    costs: Vec<[u64; 5]>,
}

impl CostTable {
    pub fn build(f: &Formula, a: &Assignment) -> Result<CostTable, DistanceError> {
        let alphabet = f.alphabet();
        if a.alphabet() != alphabet {
            return Err(FormulaError::AssignmentAlphabet.into());
        }
        if a.len() != f.n_vars() as usize {
            return Err(FormulaError::AssignmentLength {
                got: a.len(),
                expected: f.n_vars() as usize,
            }
            .into());
        }
        let n = f.vertex_count();
        let m = alphabet.size();
        let mut costs = vec![[INF; 5]; n];
        for idx in (0..n).rev() {
            let v = VertexId(idx as u32);
            let kids = f.children(v);
            let row = match f.kind(v) {
                GateKind::Var(i) | GateKind::NegVar(i) => {
                    leaf_costs(alphabet, f.kind(v), a.get(*i))
                }
                GateKind::Const(s) => {
                    let mut r = [INF; 5];
                    r[s.0 as usize] = 0;
                    r
                }
                GateKind::Not => {
                    let c = &costs[kids[0].index()];
                    let mut r = [INF; 5];
                    r[alphabet.zero().0 as usize] = c[alphabet.one().0 as usize];
                    r[alphabet.one().0 as usize] = c[alphabet.zero().0 as usize];
                    r
                }
                GateKind::And => {
                    let mut r = [INF; 5];
                    let one = alphabet.one().0 as usize;
                    let zero = alphabet.zero().0 as usize;
                    r[one] = kids.iter().fold(0, |acc, c| add(acc, costs[c.index()][one]));
                    r[zero] = kids.iter().map(|c| costs[c.index()][zero]).min().unwrap_or(INF);
                    r
                }
                GateKind::Or => {
                    let mut r = [INF; 5];
                    let one = alphabet.one().0 as usize;
                    let zero = alphabet.zero().0 as usize;
                    r[zero] = kids.iter().fold(0, |acc, c| add(acc, costs[c.index()][zero]));
                    r[one] = kids.iter().map(|c| costs[c.index()][one]).min().unwrap_or(INF);
                    r
                }
                GateKind::Table(t) => table_costs(t, kids, &costs),
                GateKind::Mdnf(terms) => {
                    table_costs(&mdnf_to_table(terms, kids.len()), kids, &costs)
                }
                GateKind::Mv(g) => {
                    let c0 = &costs[kids[0].index()];
                    let c1 = &costs[kids[1].index()];
                    let mut r = [INF; 5];
                    for va in 0..m {
                        for vb in 0..m {
                            let out = g.output(Sym(va as u8), Sym(vb as u8)).0 as usize;
                            let total = add(c0[va], c1[vb]);
                            if total < r[out] {
                                r[out] = total;
                            }
                        }
                    }
                    r
                }
            };
            costs[idx] = row;
        }
        Ok(CostTable { alphabet, costs })
    }

    fn raw(&self, v: VertexId, s: Sym) -> u64 {
        self.costs[v.index()][s.0 as usize]
    }

    /// Minimum changes to force `v` to evaluate to `s`; `None` when
    /// unreachable.
    pub fn cost(&self, v: VertexId, s: Sym) -> Option<u64> {
        let c = self.raw(v, s);
        (c < INF).then_some(c)
    }

    /// Minimum changes to make `v` meet the target.
    pub fn target_cost(&self, v: VertexId, target: Target) -> Option<u64> {
        let c = match target {
            Target::Value(s) => self.raw(v, s),
            Target::Accept => self
                .alphabet
                .accept_set()
                .iter()
                .map(|&s| self.raw(v, s))
                .min()
                .unwrap_or(INF),
        };
        (c < INF).then_some(c)
    }
}

fn leaf_costs(alphabet: Alphabet, kind: &GateKind, current: Sym) -> [u64; 5] {
    let out_of = |t: Sym| match kind {
        GateKind::Var(_) => t,
        GateKind::NegVar(_) => alphabet.bool_sym(t == alphabet.zero()),
        _ => unreachable!("leaf_costs is only called on variable leaves"),
    };
    let mut row = [INF; 5];
    row[out_of(current).0 as usize] = 0;
    for t in alphabet.input_symbols() {
        let slot = &mut row[out_of(t).0 as usize];
        let c = u64::from(t != current);
        if c < *slot {
            *slot = c;
        }
    }
    row
}

fn table_costs(t: &[Sym], kids: &[VertexId], costs: &[[u64; 5]]) -> [u64; 5] {
    let mut r = [INF; 5];
    for (x, out) in t.iter().enumerate() {
        let total = kids
            .iter()
            .enumerate()
            .fold(0, |acc, (pos, c)| add(acc, costs[c.index()][x >> pos & 1]));
        let slot = &mut r[out.0 as usize];
        if total < *slot {
            *slot = total;
        }
    }
    r
}

/// Minimum number of variable changes after which the root meets the target;
/// `None` when no assignment does.
pub fn exact_cost(f: &Formula, a: &Assignment, target: Target) -> Result<Option<u64>, DistanceError> {
    target.validate(f.alphabet())?;
    Ok(CostTable::build(f, a)?.target_cost(f.root(), target))
}

/// Same quantity as [`exact_cost`] by enumerating every candidate
/// assignment. Ground truth for tests; exponential in the variable count.
pub fn brute_force_distance(
    f: &Formula,
    a: &Assignment,
    target: Target,
) -> Result<Option<u64>, DistanceError> {
    let alphabet = f.alphabet();
    target.validate(alphabet)?;
    if a.alphabet() != alphabet {
        return Err(FormulaError::AssignmentAlphabet.into());
    }
    if a.len() != f.n_vars() as usize {
        return Err(FormulaError::AssignmentLength {
            got: a.len(),
            expected: f.n_vars() as usize,
        }
        .into());
    }
    if f.n_vars() > MAX_BRUTE_VARS {
        return Err(DistanceError::TooLarge { n: f.n_vars() });
    }
    let n = f.n_vars() as usize;
    // each position may keep its symbol or move to an input symbol
    let cands: Vec<Vec<Sym>> = (0..n)
        .map(|i| {
            let mut c = vec![a.get(i as u32)];
            for t in alphabet.input_symbols() {
                if !c.contains(&t) {
                    c.push(t);
                }
            }
            c
        })
        .collect();
    let combos: u128 = cands.iter().map(|c| c.len() as u128).product();
    if combos > MAX_BRUTE_COMBINATIONS {
        return Err(DistanceError::TooLarge { n: f.n_vars() });
    }
    let mut cur = a.clone();
    let mut idxs = vec![0usize; n];
    let mut diff = 0u64;
    let mut best: Option<u64> = None;
    let mut buf = vec![Sym(0); f.vertex_count()];
    loop {
        let out = f.evaluate_into(&cur, &mut buf)?;
        if target.met_by(alphabet, out) && best.is_none_or(|b| diff < b) {
            best = Some(diff);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(best);
            }
            idxs[pos] += 1;
            if idxs[pos] == cands[pos].len() {
                idxs[pos] = 0;
                if cands[pos].len() > 1 {
                    diff -= 1;
                    cur.set(pos as u32, cands[pos][0]);
                }
                pos += 1;
            } else {
                if idxs[pos] == 1 {
                    diff += 1;
                }
                cur.set(pos as u32, cands[pos][idxs[pos]]);
                break;
            }
        }
    }
}

/// A nearest assignment meeting the target, or `None` when unreachable.
/// Changes exactly `exact_cost` positions.
pub fn nearest_satisfying(
    f: &Formula,
    a: &Assignment,
    target: Target,
) -> Result<Option<Assignment>, DistanceError> {
    target.validate(f.alphabet())?;
    let table = CostTable::build(f, a)?;
    let alphabet = f.alphabet();
    let root_sym = match target {
        Target::Value(s) => {
            if table.raw(f.root(), s) >= INF {
                return Ok(None);
            }
            s
        }
        Target::Accept => {
            let best = alphabet
                .accept_set()
                .iter()
                .copied()
                .min_by_key(|&s| table.raw(f.root(), s))
                .expect("accept sets are never empty");
            if table.raw(f.root(), best) >= INF {
                return Ok(None);
            }
            best
        }
    };
    let mut out = a.clone();
    let mut stack = vec![(f.root(), root_sym)];
    while let Some((v, s)) = stack.pop() {
        debug_assert!(table.raw(v, s) < INF);
        let kids = f.children(v);
        match f.kind(v) {
            GateKind::Var(i) | GateKind::NegVar(i) => {
                let leaf_out = |t: Sym| match f.kind(v) {
                    GateKind::Var(_) => t,
                    _ => alphabet.bool_sym(t == alphabet.zero()),
                };
                if leaf_out(a.get(*i)) != s {
                    let t = alphabet
                        .input_symbols()
                        .into_iter()
                        .find(|&t| leaf_out(t) == s)
                        .expect("a finite leaf cost has an input symbol behind it");
                    out.set(*i, t);
                }
            }
            GateKind::Const(_) => {}
            GateKind::Not => {
                let flipped = alphabet.bool_sym(s == alphabet.zero());
                stack.push((kids[0], flipped));
            }
            GateKind::And | GateKind::Or => {
                let spread = matches!(f.kind(v), GateKind::And) == (s == alphabet.one());
                if spread {
                    // every child must take this same value
                    for &c in kids {
                        stack.push((c, s));
                    }
                } else {
                    let pick = kids
                        .iter()
                        .copied()
                        .min_by_key(|c| table.raw(*c, s))
                        .expect("internal gates have children");
                    stack.push((pick, s));
                }
            }
            GateKind::Table(_) | GateKind::Mdnf(_) => {
                let t = match f.kind(v) {
                    GateKind::Table(t) => t.clone(),
                    GateKind::Mdnf(terms) => mdnf_to_table(terms, kids.len()),
                    _ => unreachable!(),
                };
                let x = (0..t.len())
                    .filter(|&x| t[x] == s)
                    .min_by_key(|&x| {
                        kids.iter().enumerate().fold(0, |acc, (pos, c)| {
                            add(acc, table.raw(*c, Sym((x >> pos & 1) as u8)))
                        })
                    })
                    .expect("a finite gate cost has a row behind it");
                for (pos, &c) in kids.iter().enumerate() {
                    stack.push((c, Sym((x >> pos & 1) as u8)));
                }
            }
            GateKind::Mv(g) => {
                let m = alphabet.size() as u8;
                let (va, vb) = (0..m)
                    .flat_map(|va| (0..m).map(move |vb| (Sym(va), Sym(vb))))
                    .filter(|&(va, vb)| g.output(va, vb) == s)
                    .min_by_key(|&(va, vb)| add(table.raw(kids[0], va), table.raw(kids[1], vb)))
                    .expect("a finite gate cost has an input pair behind it");
                stack.push((kids[0], va));
                stack.push((kids[1], vb));
            }
        }
    }
    Ok(Some(out))
}

/// Exact relative distance as a (cost, size) pair; size counts variable
/// leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Farness {
    pub cost: u64,
    pub size: u64,
}

impl Farness {
    /// Exact comparison cost/size >= eps.
    pub fn at_least(self, eps: Frac) -> bool {
        u128::from(self.cost) * u128::from(eps.den) >= u128::from(eps.num) * u128::from(self.size)
    }

    pub fn as_f64(self) -> f64 {
        self.cost as f64 / self.size as f64
    }
}

impl std::fmt::Display for Farness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.cost, self.size)
    }
}

/// Relative distance of `a` from meeting the target; `None` when the target
/// is unreachable or the formula has no variable leaves.
pub fn farness(f: &Formula, a: &Assignment, target: Target) -> Result<Option<Farness>, DistanceError> {
    let size = f
        .vertices()
        .filter(|&v| matches!(f.kind(v), GateKind::Var(_) | GateKind::NegVar(_)))
        .count() as u64;
    if size == 0 {
        return Ok(None);
    }
    Ok(exact_cost(f, a, target)?.map(|cost| Farness { cost, size }))
}

#[derive(Clone, Debug)]
pub struct CriticalReport {
    /// Leaves whose whole root path stays far; in vertex-id order.
    pub critical: Vec<VertexId>,
    pub important: Vec<VertexId>,
    pub eps: Frac,
}

/// Vertices whose subformulas stay far along the whole root path, and the
/// leaves among them. The farness threshold at depth d is L(1+L)^{floor(d/3)}
/// with L = 2eps/3, and every Or strictly above a vertex must reach it
/// through its heaviest child.
pub fn list_critical_vertices(
    f: &Formula,
    a: &Assignment,
    eps: Frac,
) -> Result<CriticalReport, DistanceError> {
    if !is_basic(f) {
        return Err(DistanceError::NotBasic);
    }
    let stats = f.stats()?;
    let table = CostTable::build(f, a)?;
    let one = f.alphabet().one();
    let mut report = CriticalReport {
        critical: Vec::new(),
        important: Vec::new(),
        eps,
    };
    if table.raw(f.root(), one) == 0 {
        return Ok(report);
    }
    let l = BigRational::new(BigInt::from(eps.num) * 2, BigInt::from(eps.den) * 3);
    let one_plus = BigRational::one() + &l;
    let mut powers = vec![BigRational::one()];
    for _ in 0..stats.formula_depth / 3 {
        powers.push(powers.last().unwrap() * &one_plus);
    }
    let passes = |v: VertexId| {
        let c = table.raw(v, one);
        if c >= INF {
            return true;
        }
        let size = stats.size[v.index()];
        if size == 0 {
            return false;
        }
        let far = BigRational::new(BigInt::from(c), BigInt::from(size));
        far >= &l * &powers[(stats.depth[v.index()] / 3) as usize]
    };
    // parents precede children in the arena, so one forward scan settles
    // importance top-down
    let mut important = vec![false; f.vertex_count()];
    for v in f.vertices() {
        let from_parent = match stats.parent[v.index()] {
            None => true,
            Some(p) => {
                important[p.index()]
                    && (!matches!(f.kind(p), GateKind::Or)
                        || stats.heaviest_child[p.index()] == Some(v))
            }
        };
        if from_parent && passes(v) {
            important[v.index()] = true;
            report.important.push(v);
            if f.kind(v).is_leaf() {
                report.critical.push(v);
            }
        }
    }
    Ok(report)
}
