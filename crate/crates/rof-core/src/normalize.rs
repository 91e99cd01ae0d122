//! Rewriting Boolean formulas into k-x-basic and k-basic form.
//!
//! A formula is k-x-basic when negations sit only at leaves, no constants
//! remain, no And feeds an And (nor Or an Or), and every other gate is
//! unforceable with arity in `[2, k]`. k-basic additionally means monotone:
//! no negated leaves, and the unforceable gates carry their minimal-DNF term
//! sets. The rewrite eliminates forceful gate inputs one at a time: a child
//! that forces output `b` splits the gate into a 2-ary Or (b = 1) or And
//! (b = 0) of the matching literal and the gate with that input fixed.

use crate::formula::{Alphabet, Expr, Formula, FormulaError, GateKind, Sym};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("formula is trivially {}", if *value { "satisfied" } else { "unsatisfiable" })]
    TriviallyConstant { value: bool },
    #[error("gate arity {arity} exceeds the bound k = {k}")]
    ArityExceedsK { arity: usize, k: u32 },
    #[error("gate is not monotone")]
    NonMonotone,
    #[error("only Boolean formulas can be normalized")]
    NotBoolean,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// A child that forces the gate: whenever the child evaluates to `a`, the
/// gate outputs `b` regardless of the other children.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Forceful {
    pub child: usize,
    pub a: bool,
    pub b: bool,
}

/// All forceful triples of a Boolean table, scanned per the definition in
/// (child, a) order.
pub fn find_forceful(table: &[Sym], arity: usize) -> Vec<Forceful> {
    debug_assert_eq!(table.len(), 1 << arity);
    let mut out = Vec::new();
    for child in 0..arity {
        for a in [false, true] {
            let mut rows = (0..table.len()).filter(|x| (x >> child) & 1 == a as usize);
            let first = table[rows.next().expect("a table row matches every input value")];
            if rows.all(|x| table[x] == first) {
                out.push(Forceful {
                    child,
                    a,
                    b: first == Sym(1),
                });
            }
        }
    }
    out
}

/// Whether a Boolean table is monotone: flipping any input 0 -> 1 never
/// lowers the output.
pub fn is_monotone_table(table: &[Sym], arity: usize) -> bool {
    debug_assert_eq!(table.len(), 1 << arity);
    (0..table.len()).all(|x| {
        (0..arity).all(|i| x >> i & 1 == 1 || table[x] <= table[x | (1 << i)])
    })
}

/// Minimal 1-witness terms of a monotone table: the supports of the minimal
/// satisfying rows, sorted by (size, lexicographic) for determinism.
pub fn compute_mdnf(table: &[Sym], arity: usize) -> Result<Vec<Vec<u8>>, NormalizeError> {
    if !is_monotone_table(table, arity) {
        return Err(NormalizeError::NonMonotone);
    }
    let mut terms: Vec<Vec<u8>> = (0..table.len())
        .filter(|&x| {
            table[x] == Sym(1)
                && (0..arity).all(|i| x >> i & 1 == 0 || table[x & !(1 << i)] == Sym(0))
        })
        .map(|x| (0..arity as u8).filter(|&i| x >> i & 1 == 1).collect())
        .collect();
    terms.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(terms)
}

/// Rewrites into k-x-basic form. Errors when the formula collapses to a
/// constant, contains a table gate wider than k, or is not Boolean. The
/// result is stats-annotated.
pub fn to_kx_basic(f: &Formula, k: u32) -> Result<Formula, NormalizeError> {
    Ok(to_kx_basic_counted(f, k)?.0)
}

/// [`to_kx_basic`] plus the number of forceful-split rewrites applied.
pub fn to_kx_basic_counted(f: &Formula, k: u32) -> Result<(Formula, u64), NormalizeError> {
    if f.alphabet() != Alphabet::Bool {
        return Err(NormalizeError::NotBoolean);
    }
    for v in f.vertices() {
        if let GateKind::Table(_) | GateKind::Mdnf(_) = f.kind(v) {
            let arity = f.children(v).len();
            if arity as u32 > k {
                return Err(NormalizeError::ArityExceedsK { arity, k });
            }
        }
    }
    let mut e = fold(f.to_expr());
    ensure_not_const(&e)?;
    // split the lowest preorder forceful table until none remain
    let mut splits = 0;
    while let Some(next) = split_first(&e) {
        splits += 1;
        e = fold(next);
        ensure_not_const(&e)?;
    }
    let e = merge_like(push_negations(e, false));
    let out = Formula::from_expr(&e)?.with_stats();
    debug_assert!(is_kx_basic(&out, k));
    Ok((out, splits))
}

/// Rewrites a monotone formula into k-basic form: k-x-basic with every
/// remaining table gate replaced by its minimal-DNF term set. Inputs with
/// negations or non-monotone gates are rejected.
pub fn to_k_basic(f: &Formula, k: u32) -> Result<Formula, NormalizeError> {
    if f.alphabet() != Alphabet::Bool {
        return Err(NormalizeError::NotBoolean);
    }
    for v in f.vertices() {
        match f.kind(v) {
            GateKind::NegVar(_) | GateKind::Not => return Err(NormalizeError::NonMonotone),
            GateKind::Table(t) => {
                if !is_monotone_table(t, f.children(v).len()) {
                    return Err(NormalizeError::NonMonotone);
                }
            }
            _ => {}
        }
    }
    let mut kx = to_kx_basic(f, k)?;
    let mut swaps = Vec::new();
    for v in kx.vertices() {
        if let GateKind::Table(t) = kx.kind(v) {
            swaps.push((v, compute_mdnf(t, kx.children(v).len())?));
        }
    }
    for (v, terms) in swaps {
        kx.replace_kind(v, GateKind::Mdnf(terms));
    }
    let out = kx.with_stats();
    debug_assert!(is_k_basic(&out, k));
    Ok(out)
}

/// Structural check for k-x-basic form.
pub fn is_kx_basic(f: &Formula, k: u32) -> bool {
    if f.alphabet() != Alphabet::Bool {
        return false;
    }
    f.vertices().all(|v| match f.kind(v) {
        GateKind::Var(_) | GateKind::NegVar(_) => true,
        GateKind::Const(_) | GateKind::Not | GateKind::Mv(_) => false,
        GateKind::And => {
            f.children(v).len() >= 2
                && f.children(v).iter().all(|&c| !matches!(f.kind(c), GateKind::And))
        }
        GateKind::Or => {
            f.children(v).len() >= 2
                && f.children(v).iter().all(|&c| !matches!(f.kind(c), GateKind::Or))
        }
        GateKind::Table(t) => {
            let arity = f.children(v).len();
            (2..=k as usize).contains(&arity) && find_forceful(t, arity).is_empty()
        }
        GateKind::Mdnf(terms) => {
            let arity = f.children(v).len();
            (2..=k as usize).contains(&arity)
                && find_forceful(&crate::formula::mdnf_to_table(terms, arity), arity).is_empty()
        }
    })
}

/// Structural check for k-basic form: k-x-basic, negation-free, and every
/// non-And/Or gate stored as an mdnf term set.
pub fn is_k_basic(f: &Formula, k: u32) -> bool {
    is_kx_basic(f, k)
        && f.vertices().all(|v| match f.kind(v) {
            GateKind::NegVar(_) | GateKind::Table(_) => false,
            GateKind::Mdnf(terms) => {
                let arity = f.children(v).len();
                !terms.is_empty()
                    && terms
                        .iter()
                        .all(|t| !t.is_empty() && t.iter().all(|&p| (p as usize) < arity))
            }
            _ => true,
        })
}

/// Structural check for basic form: only And/Or gates over plain variables.
pub fn is_basic(f: &Formula) -> bool {
    is_kx_basic(f, 2)
        && f.vertices().all(|v| {
            matches!(f.kind(v), GateKind::Var(_) | GateKind::And | GateKind::Or)
        })
}

fn ensure_not_const(e: &Expr) -> Result<(), NormalizeError> {
    if let Expr::Const(s) = e {
        return Err(NormalizeError::TriviallyConstant { value: s.0 == 1 });
    }
    Ok(())
}

/// Constant propagation and degenerate-gate elimination, bottom-up.
fn fold(e: Expr) -> Expr {
    match e {
        Expr::Var(_) | Expr::NegVar(_) | Expr::Const(_) => e,
        Expr::Not(inner) => match fold(*inner) {
            Expr::Const(s) => Expr::Const(Sym(1 - s.0)),
            other => Expr::not(other),
        },
        Expr::And(es) => {
            let mut out = Vec::with_capacity(es.len());
            for c in es.into_iter().map(fold) {
                match c {
                    Expr::Const(Sym(0)) => return Expr::Const(Sym(0)),
                    Expr::Const(_) => {}
                    other => out.push(other),
                }
            }
            match out.len() {
                0 => Expr::Const(Sym(1)),
                1 => out.pop().unwrap(),
                _ => Expr::And(out),
            }
        }
        Expr::Or(es) => {
            let mut out = Vec::with_capacity(es.len());
            for c in es.into_iter().map(fold) {
                match c {
                    Expr::Const(Sym(1)) => return Expr::Const(Sym(1)),
                    Expr::Const(_) => {}
                    other => out.push(other),
                }
            }
            match out.len() {
                0 => Expr::Const(Sym(0)),
                1 => out.pop().unwrap(),
                _ => Expr::Or(out),
            }
        }
        Expr::Table(mut t, es) => {
            let mut kids: Vec<Expr> = es.into_iter().map(fold).collect();
            // fix constant children, lowest position first
            while let Some(pos) = kids.iter().position(|c| matches!(c, Expr::Const(_))) {
                let value = match kids.remove(pos) {
                    Expr::Const(s) => s.0 as usize,
                    _ => unreachable!(),
                };
                t = restrict_table(&t, pos, value);
            }
            match kids.len() {
                0 => Expr::Const(t[0]),
                1 => match (t[0].0, t[1].0) {
                    (0, 0) => Expr::Const(Sym(0)),
                    (1, 1) => Expr::Const(Sym(1)),
                    (0, 1) => kids.pop().unwrap(),
                    _ => fold(Expr::not(kids.pop().unwrap())),
                },
                _ => Expr::Table(t, kids),
            }
        }
        Expr::Mv(..) => unreachable!("normalization rejects multi-valued formulas up front"),
    }
}

/// Table with input `pos` fixed to `value` (arity drops by one).
fn restrict_table(t: &[Sym], pos: usize, value: usize) -> Vec<Sym> {
    let low_mask = (1usize << pos) - 1;
    (0..t.len() / 2)
        .map(|y| {
            let x = (y & low_mask) | (value << pos) | ((y & !low_mask) << 1);
            t[x]
        })
        .collect()
}

/// Applies the forceful-split rewrite to the first (preorder) table gate
/// with a forceful child; `None` when no gate is forceful.
fn split_first(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Var(_) | Expr::NegVar(_) | Expr::Const(_) => None,
        Expr::Not(inner) => split_first(inner).map(Expr::not),
        Expr::And(es) => split_in_children(es).map(Expr::And),
        Expr::Or(es) => split_in_children(es).map(Expr::Or),
        Expr::Table(t, es) => {
            let triples = find_forceful(t, es.len());
            if !triples.is_empty() {
                return Some(apply_split(t, es, &triples));
            }
            split_in_children(es).map(|kids| Expr::Table(t.clone(), kids))
        }
        Expr::Mv(..) => unreachable!(),
    }
}

fn split_in_children(es: &[Expr]) -> Option<Vec<Expr>> {
    for (i, c) in es.iter().enumerate() {
        if let Some(new) = split_first(c) {
            let mut kids = es.to_vec();
            kids[i] = new;
            return Some(kids);
        }
    }
    None
}

fn apply_split(t: &[Sym], es: &[Expr], triples: &[Forceful]) -> Expr {
    let has = |child, a, b| triples.contains(&Forceful { child, a, b });
    for (pos, child) in es.iter().enumerate() {
        // gate is the projection onto this child, or its negation
        if has(pos, false, false) && has(pos, true, true) {
            return child.clone();
        }
        if has(pos, false, true) && has(pos, true, false) {
            return Expr::not(child.clone());
        }
    }
    let &Forceful { child, a, b } = &triples[0];
    // child = a forces output b, so the gate is equivalent to
    //   b = 1:  [v = a] or  f with v fixed to 1-a
    //   b = 0:  [v != a] and f with v fixed to 1-a
    let lit = if a == b {
        es[child].clone()
    } else {
        Expr::not(es[child].clone())
    };
    let residual_table = restrict_table(t, child, (!a) as usize);
    let mut rest: Vec<Expr> = es.to_vec();
    rest.remove(child);
    let residual = Expr::Table(residual_table, rest);
    if b {
        Expr::Or(vec![lit, residual])
    } else {
        Expr::And(vec![lit, residual])
    }
}

/// Eliminates Not gates: double negations cancel, De Morgan through And/Or,
/// absorbed into table outputs, and negated variables become leaf labels.
fn push_negations(e: Expr, negate: bool) -> Expr {
    match e {
        Expr::Var(i) => {
            if negate {
                Expr::NegVar(i)
            } else {
                Expr::Var(i)
            }
        }
        Expr::NegVar(i) => {
            if negate {
                Expr::Var(i)
            } else {
                Expr::NegVar(i)
            }
        }
        Expr::Const(s) => {
            if negate {
                Expr::Const(Sym(1 - s.0))
            } else {
                Expr::Const(s)
            }
        }
        Expr::Not(inner) => push_negations(*inner, !negate),
        Expr::And(es) => {
            let kids = es.into_iter().map(|c| push_negations(c, negate)).collect();
            if negate {
                Expr::Or(kids)
            } else {
                Expr::And(kids)
            }
        }
        Expr::Or(es) => {
            let kids = es.into_iter().map(|c| push_negations(c, negate)).collect();
            if negate {
                Expr::And(kids)
            } else {
                Expr::Or(kids)
            }
        }
        Expr::Table(t, es) => {
            let t = if negate {
                t.iter().map(|s| Sym(1 - s.0)).collect()
            } else {
                t
            };
            let kids = es.into_iter().map(|c| push_negations(c, false)).collect();
            Expr::Table(t, kids)
        }
        Expr::Mv(..) => unreachable!(),
    }
}

/// Splices And children into And parents (and Or into Or), bottom-up.
fn merge_like(e: Expr) -> Expr {
    match e {
        Expr::And(es) => {
            let mut out = Vec::with_capacity(es.len());
            for c in es.into_iter().map(merge_like) {
                match c {
                    Expr::And(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            if out.len() == 1 {
                out.pop().unwrap()
            } else {
                Expr::And(out)
            }
        }
        Expr::Or(es) => {
            let mut out = Vec::with_capacity(es.len());
            for c in es.into_iter().map(merge_like) {
                match c {
                    Expr::Or(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            if out.len() == 1 {
                out.pop().unwrap()
            } else {
                Expr::Or(out)
            }
        }
        Expr::Table(t, es) => Expr::Table(t, es.into_iter().map(merge_like).collect()),
        Expr::Not(inner) => Expr::not(merge_like(*inner)),
        other => other,
    }
}

#[cfg(test)]
mod tests;
