//! Syntactic unification and critical-pair enumeration.

use std::fmt;

use crate::rewrite::{Rule, Trs};
use crate::term::{Position, Substitution, Term};

/// Two renamed-apart copies of a pair of rules: every variable of the first
/// gets the suffix `#id`, every variable of the second `#id` (or `#id'` when
/// both rules carry the same id).
pub fn rename_apart(outer: &Rule, inner: &Rule) -> (Rule, Rule) {
    let outer_tag = format!("#{}", outer.id);
    let inner_tag = if inner.id == outer.id {
        format!("#{}'", inner.id)
    } else {
        format!("#{}", inner.id)
    };
    (rename(outer, &outer_tag), rename(inner, &inner_tag))
}

fn rename(rule: &Rule, tag: &str) -> Rule {
    let f = |x: &str| format!("{x}{tag}");
    Rule {
        id: rule.id,
        lhs: rule.lhs.rename_vars(&f),
        rhs: rule.rhs.rename_vars(&f),
    }
}

/// Most general unifier in idempotent form, by transformation of the
/// equation set to solved form (delete, decompose, orient, eliminate) with an
/// occurs check.
pub fn mgu(left: &Term, right: &Term) -> Option<Substitution> {
    unify_all(vec![(left.clone(), right.clone())])
}

/// Simultaneous unifier of a list of equations.
pub fn unify_all(mut equations: Vec<(Term, Term)>) -> Option<Substitution> {
    let mut solved: Vec<(String, Term)> = Vec::new();
    while let Some((s, t)) = equations.pop() {
        match (s, t) {
            (s, t) if s == t => {}
            (Term::App(f, sargs), Term::App(g, targs)) => {
                if f != g || sargs.len() != targs.len() {
                    return None;
                }
                equations.extend(sargs.into_iter().zip(targs));
            }
            (Term::App(f, args), Term::Var(x)) | (Term::Var(x), Term::App(f, args)) => {
                let t = Term::App(f, args);
                if t.contains_var(&x) {
                    return None;
                }
                eliminate(&x, &t, &mut equations, &mut solved);
            }
            (Term::Var(x), t @ Term::Var(_)) => eliminate(&x, &t, &mut equations, &mut solved),
        }
    }
    Some(solved.into_iter().collect())
}

fn eliminate(x: &str, t: &Term, equations: &mut [(Term, Term)], solved: &mut Vec<(String, Term)>) {
    let single = Substitution::from_pairs([(x, t.clone())]);
    for (l, r) in equations.iter_mut() {
        *l = single.apply(l);
        *r = single.apply(r);
    }
    for (_, u) in solved.iter_mut() {
        *u = single.apply(u);
    }
    solved.push((x.to_string(), t.clone()));
}

/// An overlap of `inner`'s lhs into a non-variable position of `outer`'s lhs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPair {
    pub outer_rule: usize,
    pub inner_rule: usize,
    pub overlap_pos: Position,
    /// Over the renamed-apart variables (see [`rename_apart`]).
    pub mgu: Substitution,
    /// Contraction of the inner redex in the peak.
    pub left: Term,
    /// Contraction of the outer redex in the peak.
    pub right: Term,
    /// The overlapped term `lhs(outer)·mgu`.
    pub peak: Term,
    pub trivial: bool,
}

impl fmt::Display for CriticalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}, {}> (outer {}, inner {}, at {})",
            self.left, self.right, self.outer_rule, self.inner_rule, self.overlap_pos
        )
    }
}

/// Every critical pair of `trs`, over all ordered rule pairs (a rule paired
/// with a renamed copy of itself included, except at the root).
///
/// Order: outer rule, inner rule, then overlap position.
pub fn critical_pairs(trs: &Trs) -> Vec<CriticalPair> {
    let mut out = Vec::new();
    for outer in trs.rules() {
        for inner in trs.rules() {
            overlaps(outer, inner, &mut out);
        }
    }
    out
}

/// Critical pairs between one ordered pair of rules.
pub fn overlaps(outer: &Rule, inner: &Rule, out: &mut Vec<CriticalPair>) {
    let (o, i) = rename_apart(outer, inner);
    for p in o.lhs.non_var_positions() {
        if outer.id == inner.id && p.is_root() {
            continue;
        }
        let sub = o.lhs.get(&p).expect("enumerated position");
        if let Some(sigma) = mgu(sub, &i.lhs) {
            let left = sigma.apply(&o.lhs.replace_at(&p, i.rhs.clone()).expect("valid position"));
            let right = sigma.apply(&o.rhs);
            out.push(CriticalPair {
                outer_rule: outer.id,
                inner_rule: inner.id,
                overlap_pos: p,
                mgu: sigma.clone(),
                trivial: left == right,
                peak: sigma.apply(&o.lhs),
                left,
                right,
            });
        }
    }
}
