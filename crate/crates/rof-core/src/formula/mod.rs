//! Read-once formulas as preorder gate arenas.
//!
//! A formula is a rooted ordered tree over one of three alphabets. Vertices
//! live in a `Vec` in preorder, so the root is vertex 0, every subtree is a
//! contiguous id range, and a reverse scan visits children before parents.
//! Construction goes through [`Expr`] (or the text parser) and validates the
//! read-once property: no variable index appears in two leaves.

mod oracle;
mod parse;

pub use oracle::{Assignment, CountingOracle};
pub use parse::parse_formula;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symbol of an alphabet, stored as its index in the alphabet's order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub u8);

/// The three alphabets formulas are defined over.
///
/// `Bal5` is ordered `0 < F0 < P < F1 < 1`; the Boolean input symbols sit at
/// the two ends. For `Bool` and `Bal4` the first two symbols are `0` and `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alphabet {
    Bool,
    Bal4,
    Bal5,
}

impl Alphabet {
    pub fn size(self) -> usize {
        match self {
            Alphabet::Bool => 2,
            Alphabet::Bal4 => 4,
            Alphabet::Bal5 => 5,
        }
    }

    pub fn symbols(self) -> &'static [&'static str] {
        match self {
            Alphabet::Bool => &["0", "1"],
            Alphabet::Bal4 => &["0", "1", "P", "F"],
            Alphabet::Bal5 => &["0", "F0", "P", "F1", "1"],
        }
    }

    /// The Boolean symbol `0` of this alphabet.
    pub fn zero(self) -> Sym {
        Sym(0)
    }

    /// The Boolean symbol `1` of this alphabet.
    pub fn one(self) -> Sym {
        match self {
            Alphabet::Bal5 => Sym(4),
            _ => Sym(1),
        }
    }

    /// Symbols input variables may take (always the two Boolean ones).
    pub fn input_symbols(self) -> [Sym; 2] {
        [self.zero(), self.one()]
    }

    pub fn bool_sym(self, b: bool) -> Sym {
        if b {
            self.one()
        } else {
            self.zero()
        }
    }

    /// Root values counted as accepting: `1` for Boolean formulas, everything
    /// but `F` for the 4-valued balancing formula, everything below `F1` for
    /// the 5-valued sub-balancing one.
    pub fn accept_set(self) -> &'static [Sym] {
        match self {
            Alphabet::Bool => &[Sym(1)],
            Alphabet::Bal4 => &[Sym(0), Sym(1), Sym(2)],
            Alphabet::Bal5 => &[Sym(0), Sym(1), Sym(2)],
        }
    }

    pub fn name(self, s: Sym) -> &'static str {
        self.symbols()[s.0 as usize]
    }

    pub fn parse_name(self, text: &str) -> Option<Sym> {
        self.symbols()
            .iter()
            .position(|&n| n == text)
            .map(|i| Sym(i as u8))
    }

    /// Single-character code used in assignment strings. `Bal5` uses `f` for
    /// `F0` and `F` for `F1`.
    pub fn symbol_char(self, s: Sym) -> char {
        match self {
            Alphabet::Bool => ['0', '1'][s.0 as usize],
            Alphabet::Bal4 => ['0', '1', 'P', 'F'][s.0 as usize],
            Alphabet::Bal5 => ['0', 'f', 'P', 'F', '1'][s.0 as usize],
        }
    }

    pub fn parse_char(self, c: char) -> Option<Sym> {
        match self {
            Alphabet::Bool => ['0', '1'].iter().position(|&x| x == c),
            Alphabet::Bal4 => ['0', '1', 'P', 'F'].iter().position(|&x| x == c),
            Alphabet::Bal5 => ['0', 'f', 'P', 'F', '1'].iter().position(|&x| x == c),
        }
        .map(|i| Sym(i as u8))
    }

    pub fn label(self) -> &'static str {
        match self {
            Alphabet::Bool => "boolean",
            Alphabet::Bal4 => "bal4",
            Alphabet::Bal5 => "bal5",
        }
    }
}

/// Built-in multi-valued binary gates used by the lower-bound formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MvGate {
    Bal4,
    Bal5,
}

/// 4-valued balancing gate over `0,1,P,F` (row = left input, column = right):
/// equal Boolean inputs pass through, a balanced pair or `(P,P)` gives `P`,
/// everything else fails.
const BAL4_TABLE: [[u8; 4]; 4] = [
    // b:  0  1  P  F
    [0, 2, 3, 3], // a = 0
    [2, 1, 3, 3], // a = 1
    [3, 3, 2, 3], // a = P
    [3, 3, 3, 3], // a = F
];

/// 5-valued balancing gate over `0 < F0 < P < F1 < 1`, written out literally
/// from its defining rule list (checked against the rules in tests). Note the
/// gate is not monotone under the alphabet order: `(0,F1) -> F1` yet
/// `(0,1) -> P`, so raising `F1` to `1` lowers the output.
const BAL5_TABLE: [[u8; 5]; 5] = [
    // b:  0  F0 P  F1 1
    [0, 1, 1, 3, 2], // a = 0
    [1, 1, 1, 3, 3], // a = F0
    [1, 1, 2, 3, 3], // a = P
    [3, 3, 3, 3, 3], // a = F1
    [2, 3, 3, 3, 4], // a = 1
];

impl MvGate {
    pub fn alphabet(self) -> Alphabet {
        match self {
            MvGate::Bal4 => Alphabet::Bal4,
            MvGate::Bal5 => Alphabet::Bal5,
        }
    }

    pub fn output(self, a: Sym, b: Sym) -> Sym {
        match self {
            MvGate::Bal4 => Sym(BAL4_TABLE[a.0 as usize][b.0 as usize]),
            MvGate::Bal5 => Sym(BAL5_TABLE[a.0 as usize][b.0 as usize]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MvGate::Bal4 => "bal4",
            MvGate::Bal5 => "bal5",
        }
    }
}

/// Gate label of a vertex. `Const` and `Not` only occur before normalization;
/// `Mdnf` only after `to_k_basic` (it stores the minimal 1-witness terms of a
/// monotone gate as sorted child-position sets).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateKind {
    Var(u32),
    NegVar(u32),
    Const(Sym),
    Not,
    And,
    Or,
    /// Boolean truth table, `table[i]` for input tuple whose bits are the
    /// base-2 digits of `i` with child 0 least significant.
    Table(Vec<Sym>),
    Mdnf(Vec<Vec<u8>>),
    Mv(MvGate),
}

impl GateKind {
    pub fn is_leaf(&self) -> bool {
        matches!(self, GateKind::Var(_) | GateKind::NegVar(_) | GateKind::Const(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            GateKind::Var(_) => "var",
            GateKind::NegVar(_) => "negated var",
            GateKind::Const(_) => "const",
            GateKind::Not => "not",
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Table(_) => "tbl",
            GateKind::Mdnf(_) => "mdnf",
            GateKind::Mv(_) => "mv",
        }
    }
}

/// Index of a vertex in the formula arena. Vertex 0 is the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Construction tree for formulas; lowered into the arena by
/// [`Formula::from_expr`]. Generators and tests build these directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(u32),
    NegVar(u32),
    Const(Sym),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Table(Vec<Sym>, Vec<Expr>),
    Mv(MvGate, Vec<Expr>),
}

impl Expr {
    pub fn var(i: u32) -> Expr {
        Expr::Var(i)
    }

    pub fn nvar(i: u32) -> Expr {
        Expr::NegVar(i)
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(es: Vec<Expr>) -> Expr {
        Expr::And(es)
    }

    pub fn or(es: Vec<Expr>) -> Expr {
        Expr::Or(es)
    }

    /// Boolean table gate from its output bits, tuple index as in
    /// [`GateKind::Table`].
    pub fn table(bits: &[u8], es: Vec<Expr>) -> Expr {
        Expr::Table(bits.iter().map(|&b| Sym(b)).collect(), es)
    }
}

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{0} appears in more than one leaf")]
    DuplicateVariable(u32),
    #[error("{gate} gate has {got} children, expected {expected}")]
    Arity {
        gate: &'static str,
        got: usize,
        expected: String,
    },
    #[error("table of arity {arity} has {got} entries, expected {expected}")]
    TableLength {
        arity: usize,
        got: usize,
        expected: usize,
    },
    #[error("{gate} gate is not valid over the {alphabet} alphabet")]
    GateAlphabet {
        gate: &'static str,
        alphabet: &'static str,
    },
    #[error("formula mixes gates over different alphabets")]
    MixedAlphabets,
    #[error("symbol index {0} is not in the alphabet")]
    BadSymbol(u8),
    #[error("assignment is over the wrong alphabet")]
    AssignmentAlphabet,
    #[error("assignment has length {got}, formula needs {expected}")]
    AssignmentLength { got: usize, expected: usize },
    #[error("variable x{0} queried out of assignment range")]
    QueryOutOfRange(u32),
    #[error("subtree statistics not annotated; call annotate_stats first")]
    NotAnnotated,
    #[error("vertex {0} is a leaf")]
    LeafVertex(u32),
    #[error("vertex {0} has no variables to sample")]
    EmptySubtree(u32),
    #[error("formula nests deeper than the supported limit")]
    TooDeep,
    #[error("constant gates have no text form")]
    UnprintableConst,
}

/// Maximum nesting depth accepted by the recursive parser/serializer.
pub(crate) const MAX_NEST: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub kind: GateKind,
    pub children: Vec<VertexId>,
}

/// Per-vertex subtree statistics, filled in by [`Formula::annotate_stats`].
///
/// `size` counts variable leaves (a constant leaf has size 0), `depth` is the
/// edge distance from the root, `heaviest_child` breaks size ties toward the
/// smaller vertex id, and `subtree_end` is the exclusive end of the vertex's
/// contiguous preorder id range.
#[derive(Clone, Debug)]
pub struct Stats {
    pub size: Vec<u64>,
    pub depth: Vec<u32>,
    pub parent: Vec<Option<VertexId>>,
    pub heaviest_child: Vec<Option<VertexId>>,
    pub subtree_end: Vec<u32>,
    pub var_leaves: Vec<VertexId>,
    pub formula_depth: u32,
}

/// A read-once formula. See the module docs for the arena layout invariants.
#[derive(Clone, Debug)]
pub struct Formula {
    alphabet: Alphabet,
    verts: Vec<Vertex>,
    n_vars: u32,
    stats: Option<Stats>,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.verts == other.verts
    }
}

impl Formula {
    /// Lowers an expression tree into a validated preorder arena. The
    /// alphabet is inferred: any `mv` gate fixes it, otherwise Boolean.
    pub fn from_expr(expr: &Expr) -> Result<Formula, FormulaError> {
        let mut alphabet = None;
        infer_alphabet(expr, &mut alphabet, 0)?;
        let alphabet = alphabet.unwrap_or(Alphabet::Bool);
        let mut verts = Vec::new();
        lower(expr, alphabet, &mut verts, 0)?;
        let mut seen = std::collections::HashSet::new();
        let mut max_var = None;
        for v in &verts {
            if let GateKind::Var(i) | GateKind::NegVar(i) = v.kind {
                if !seen.insert(i) {
                    return Err(FormulaError::DuplicateVariable(i));
                }
                max_var = Some(max_var.map_or(i, |m: u32| m.max(i)));
            }
        }
        Ok(Formula {
            alphabet,
            verts,
            n_vars: max_var.map_or(0, |m| m + 1),
            stats: None,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub const fn root(&self) -> VertexId {
        VertexId(0)
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    /// Number of assignment positions: one past the largest variable index.
    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn kind(&self, v: VertexId) -> &GateKind {
        &self.verts[v.index()].kind
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.verts[v.index()].children
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.verts.len() as u32).map(VertexId)
    }

    /// Swaps the gate at `v` for one of the same arity, dropping cached
    /// stats. The caller is responsible for the new gate accepting the
    /// existing child list.
    pub fn replace_kind(&mut self, v: VertexId, kind: GateKind) {
        self.verts[v.index()].kind = kind;
        self.stats = None;
    }

    /// Variable indices present, in leaf preorder.
    pub fn variables(&self) -> Vec<u32> {
        self.verts
            .iter()
            .filter_map(|v| match v.kind {
                GateKind::Var(i) | GateKind::NegVar(i) => Some(i),
                _ => None,
            })
            .collect()
    }

    /// Rebuilds the expression tree for this formula (used by normalization).
    pub fn to_expr(&self) -> Expr {
        self.expr_at(self.root())
    }

    fn expr_at(&self, v: VertexId) -> Expr {
        let kids = || self.children(v).iter().map(|&c| self.expr_at(c)).collect();
        match self.kind(v).clone() {
            GateKind::Var(i) => Expr::Var(i),
            GateKind::NegVar(i) => Expr::NegVar(i),
            GateKind::Const(s) => Expr::Const(s),
            GateKind::Not => Expr::Not(Box::new(self.expr_at(self.children(v)[0]))),
            GateKind::And => Expr::And(kids()),
            GateKind::Or => Expr::Or(kids()),
            GateKind::Table(t) => Expr::Table(t, kids()),
            GateKind::Mdnf(terms) => {
                // mdnf gates have no Expr form; expand to the equivalent table
                let arity = self.children(v).len();
                Expr::Table(mdnf_to_table(&terms, arity), kids())
            }
            GateKind::Mv(g) => Expr::Mv(g, kids()),
        }
    }

    /// Evaluates the formula bottom-up on a full assignment.
    pub fn evaluate(&self, a: &Assignment) -> Result<Sym, FormulaError> {
        let mut buf = vec![Sym(0); self.verts.len()];
        self.evaluate_into(a, &mut buf)
    }

    /// Evaluation reusing a caller-provided value buffer (one slot per
    /// vertex); handy for exhaustive enumeration.
    pub fn evaluate_into(&self, a: &Assignment, vals: &mut [Sym]) -> Result<Sym, FormulaError> {
        if a.alphabet() != self.alphabet {
            return Err(FormulaError::AssignmentAlphabet);
        }
        if a.len() != self.n_vars as usize {
            return Err(FormulaError::AssignmentLength {
                got: a.len(),
                expected: self.n_vars as usize,
            });
        }
        for idx in (0..self.verts.len()).rev() {
            let vert = &self.verts[idx];
            vals[idx] = match &vert.kind {
                GateKind::Var(i) => a.get(*i),
                GateKind::NegVar(i) => {
                    let s = a.get(*i);
                    self.alphabet.bool_sym(s == self.alphabet.zero())
                }
                GateKind::Const(s) => *s,
                GateKind::Not => {
                    let c = vals[vert.children[0].index()];
                    self.alphabet.bool_sym(c == self.alphabet.zero())
                }
                GateKind::And => {
                    let one = self.alphabet.one();
                    let all = vert.children.iter().all(|c| vals[c.index()] == one);
                    self.alphabet.bool_sym(all)
                }
                GateKind::Or => {
                    let one = self.alphabet.one();
                    let any = vert.children.iter().any(|c| vals[c.index()] == one);
                    self.alphabet.bool_sym(any)
                }
                GateKind::Table(t) => {
                    let mut idx = 0usize;
                    for (pos, c) in vert.children.iter().enumerate() {
                        idx += (vals[c.index()].0 as usize) << pos;
                    }
                    t[idx]
                }
                GateKind::Mdnf(terms) => {
                    let one = self.alphabet.one();
                    let sat = terms
                        .iter()
                        .any(|t| t.iter().all(|&p| vals[vert.children[p as usize].index()] == one));
                    self.alphabet.bool_sym(sat)
                }
                GateKind::Mv(g) => {
                    g.output(vals[vert.children[0].index()], vals[vert.children[1].index()])
                }
            };
        }
        Ok(vals[0])
    }

    /// Computes and stores [`Stats`] for every vertex.
    pub fn annotate_stats(&mut self) {
        let n = self.verts.len();
        let mut size = vec![0u64; n];
        let mut subtree_end = vec![0u32; n];
        for idx in (0..n).rev() {
            let vert = &self.verts[idx];
            match vert.kind {
                GateKind::Var(_) | GateKind::NegVar(_) => {
                    size[idx] = 1;
                    subtree_end[idx] = idx as u32 + 1;
                }
                GateKind::Const(_) => {
                    size[idx] = 0;
                    subtree_end[idx] = idx as u32 + 1;
                }
                _ => {
                    size[idx] = vert.children.iter().map(|c| size[c.index()]).sum();
                    subtree_end[idx] = vert
                        .children
                        .last()
                        .map_or(idx as u32 + 1, |c| subtree_end[c.index()]);
                }
            }
        }
        let mut depth = vec![0u32; n];
        let mut parent = vec![None; n];
        let mut heaviest_child = vec![None; n];
        let mut formula_depth = 0;
        for idx in 0..n {
            let d = depth[idx];
            formula_depth = formula_depth.max(d);
            let mut best: Option<VertexId> = None;
            for &c in &self.verts[idx].children {
                depth[c.index()] = d + 1;
                parent[c.index()] = Some(VertexId(idx as u32));
                // strict > keeps the smallest id among equal-sized children
                if best.map_or(true, |b| size[c.index()] > size[b.index()]) {
                    best = Some(c);
                }
            }
            heaviest_child[idx] = best;
        }
        let var_leaves = self
            .verts
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v.kind, GateKind::Var(_) | GateKind::NegVar(_)))
            .map(|(i, _)| VertexId(i as u32))
            .collect();
        self.stats = Some(Stats {
            size,
            depth,
            parent,
            heaviest_child,
            subtree_end,
            var_leaves,
            formula_depth,
        });
    }

    pub fn with_stats(mut self) -> Self {
        self.annotate_stats();
        self
    }

    pub fn stats(&self) -> Result<&Stats, FormulaError> {
        self.stats.as_ref().ok_or(FormulaError::NotAnnotated)
    }

    /// Variable-leaf count of the subtree rooted at `v`.
    pub fn size_of(&self, v: VertexId) -> Result<u64, FormulaError> {
        Ok(self.stats()?.size[v.index()])
    }

    /// Variable leaves inside the subtree of `v`, in preorder.
    pub fn subtree_var_leaves(&self, v: VertexId) -> Result<&[VertexId], FormulaError> {
        let stats = self.stats()?;
        let end = VertexId(stats.subtree_end[v.index()]);
        let lo = stats.var_leaves.partition_point(|&l| l < v);
        let hi = stats.var_leaves.partition_point(|&l| l < end);
        Ok(&stats.var_leaves[lo..hi])
    }

    /// Draws a child of `v` with probability proportional to subtree size.
    pub fn weighted_child_sample<R: Rng + ?Sized>(
        &self,
        v: VertexId,
        rng: &mut R,
    ) -> Result<VertexId, FormulaError> {
        let stats = self.stats()?;
        let kids = self.children(v);
        if kids.is_empty() {
            return Err(FormulaError::LeafVertex(v.0));
        }
        let total = stats.size[v.index()];
        if total == 0 {
            return Err(FormulaError::EmptySubtree(v.0));
        }
        let mut r = rng.gen_range(0..total);
        for &c in kids {
            let s = stats.size[c.index()];
            if r < s {
                return Ok(c);
            }
            r -= s;
        }
        unreachable!("child sizes sum to the parent size")
    }

    /// The "special relatives" of `v` below `top`: children of strict
    /// Or-ancestors of `v` (ancestors strictly above `v`, at or below `top`),
    /// excluding `v` itself and its strict ancestors.
    pub fn or_ancestor_relatives(
        &self,
        v: VertexId,
        top: VertexId,
    ) -> Result<Vec<VertexId>, FormulaError> {
        let stats = self.stats()?;
        let mut out = Vec::new();
        let mut cur = v;
        while cur != top {
            // `below` is the child of the next ancestor on the path down to v
            let below = cur;
            cur = stats.parent[cur.index()].expect("top is an ancestor of v");
            if matches!(self.kind(cur), GateKind::Or) {
                for &c in self.children(cur) {
                    if c != below {
                        out.push(c);
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Expands mdnf terms to the equivalent truth table over `arity` inputs.
pub(crate) fn mdnf_to_table(terms: &[Vec<u8>], arity: usize) -> Vec<Sym> {
    (0..1usize << arity)
        .map(|x| {
            let sat = terms
                .iter()
                .any(|t| t.iter().all(|&p| x >> p & 1 == 1));
            Sym(sat as u8)
        })
        .collect()
}

fn infer_alphabet(
    expr: &Expr,
    alphabet: &mut Option<Alphabet>,
    depth: usize,
) -> Result<(), FormulaError> {
    if depth > MAX_NEST {
        return Err(FormulaError::TooDeep);
    }
    match expr {
        Expr::Mv(g, es) => {
            let a = g.alphabet();
            match alphabet {
                None => *alphabet = Some(a),
                Some(prev) if *prev != a => return Err(FormulaError::MixedAlphabets),
                _ => {}
            }
            for e in es {
                infer_alphabet(e, alphabet, depth + 1)?;
            }
        }
        Expr::Not(e) => infer_alphabet(e, alphabet, depth + 1)?,
        Expr::And(es) | Expr::Or(es) | Expr::Table(_, es) => {
            for e in es {
                infer_alphabet(e, alphabet, depth + 1)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn lower(
    expr: &Expr,
    alphabet: Alphabet,
    verts: &mut Vec<Vertex>,
    depth: usize,
) -> Result<(), FormulaError> {
    if depth > MAX_NEST {
        return Err(FormulaError::TooDeep);
    }
    let boolean_only = |gate: &'static str| {
        if alphabet == Alphabet::Bool {
            Ok(())
        } else {
            Err(FormulaError::GateAlphabet {
                gate,
                alphabet: alphabet.label(),
            })
        }
    };
    let slot = verts.len();
    verts.push(Vertex {
        kind: GateKind::Var(0),
        children: Vec::new(),
    });
    let (kind, children): (GateKind, &[Expr]) = match expr {
        Expr::Var(i) => (GateKind::Var(*i), &[]),
        Expr::NegVar(i) => {
            boolean_only("negated var")?;
            (GateKind::NegVar(*i), &[])
        }
        Expr::Const(s) => {
            if s.0 as usize >= alphabet.size() {
                return Err(FormulaError::BadSymbol(s.0));
            }
            (GateKind::Const(*s), &[])
        }
        Expr::Not(e) => {
            boolean_only("not")?;
            (GateKind::Not, std::slice::from_ref(e))
        }
        Expr::And(es) => {
            boolean_only("and")?;
            if es.is_empty() {
                return Err(FormulaError::Arity {
                    gate: "and",
                    got: 0,
                    expected: "at least 1".into(),
                });
            }
            (GateKind::And, es)
        }
        Expr::Or(es) => {
            boolean_only("or")?;
            if es.is_empty() {
                return Err(FormulaError::Arity {
                    gate: "or",
                    got: 0,
                    expected: "at least 1".into(),
                });
            }
            (GateKind::Or, es)
        }
        Expr::Table(t, es) => {
            boolean_only("tbl")?;
            if es.is_empty() {
                return Err(FormulaError::Arity {
                    gate: "tbl",
                    got: 0,
                    expected: "at least 1".into(),
                });
            }
            if t.len() != 1usize << es.len() {
                return Err(FormulaError::TableLength {
                    arity: es.len(),
                    got: t.len(),
                    expected: 1usize << es.len(),
                });
            }
            if let Some(s) = t.iter().find(|s| s.0 > 1) {
                return Err(FormulaError::BadSymbol(s.0));
            }
            (GateKind::Table(t.clone()), es)
        }
        Expr::Mv(g, es) => {
            if es.len() != 2 {
                return Err(FormulaError::Arity {
                    gate: "mv",
                    got: es.len(),
                    expected: "exactly 2".into(),
                });
            }
            debug_assert_eq!(g.alphabet(), alphabet);
            (GateKind::Mv(*g), es)
        }
    };
    verts[slot].kind = kind;
    let mut child_ids = Vec::with_capacity(children.len());
    for c in children {
        child_ids.push(VertexId(verts.len() as u32));
        lower(c, alphabet, verts, depth + 1)?;
    }
    verts[slot].children = child_ids;
    Ok(())
}

/// Result of splitting a vertex's children into heavy and light.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classified {
    /// The split index: smallest l with the l'th largest child smaller than
    /// `size * (4k/eps)^-l`, or `k + 1` when no such l exists.
    pub ell: u32,
    pub heavy: Vec<VertexId>,
    pub light: Vec<VertexId>,
}

/// Splits the children of `v` by the paper's size thresholds against the
/// subformula size `S = size(v)`: scanning l = 1, 2, ..., the first l whose
/// l'th-largest child has size below `S * (4k/eps)^-l` makes the l-1 largest
/// children heavy and the rest light. If every l fails the test, l = k+1 and
/// all children are heavy.
pub fn classify_children(
    f: &Formula,
    v: VertexId,
    eps: f64,
    k: u32,
) -> Result<Classified, FormulaError> {
    let stats = f.stats()?;
    let kids = f.children(v);
    if kids.is_empty() {
        return Err(FormulaError::LeafVertex(v.0));
    }
    let mut order: Vec<VertexId> = kids.to_vec();
    order.sort_by_key(|c| (std::cmp::Reverse(stats.size[c.index()]), *c));
    let total = stats.size[v.index()] as f64;
    let ratio = eps / (4.0 * k as f64);
    let mut bound = total;
    for (i, c) in order.iter().enumerate() {
        bound *= ratio; // total * (4k/eps)^-(i+1)
        if (stats.size[c.index()] as f64) < bound {
            return Ok(Classified {
                ell: i as u32 + 1,
                heavy: order[..i].to_vec(),
                light: order[i..].to_vec(),
            });
        }
    }
    Ok(Classified {
        ell: k + 1,
        heavy: order,
        light: Vec::new(),
    })
}
