//! Random generators and brute-force property checkers.
//!
//! Every checker returns a [`PropertyReport`]. `cases_run` counts individual
//! checks (one per divergence or per step); `inconclusive` counts subjects on
//! which a cap was hit, so it is at most one per call.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::moves::{triangle_join, ParallelMoves};
use crate::orthogonality::{ambiguous, linear_trs, orthogonal};
use crate::parallel::{
    apply_parallel, lift_single, parallel_reducts_bounded, serialize, DEFAULT_STEP_CAP,
};
use crate::rewrite::{match_term, Reachable, Trs, DEFAULT_NODE_CAP};
use crate::term::{Signature, Term};

/// Rejections tolerated by [`gen_trs`] before giving up.
pub const MAX_REJECTIONS: usize = 10_000;
/// Consecutive rejections after which the target rule count is lowered.
const SHRINK_AFTER: usize = 50;
/// Subject size used by the diamond suite.
pub const DIAMOND_TERM_NODES: usize = 10;

const VAR_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("signature has no constant")]
    NoConstant,
    #[error("generation exhausted after {0} rejections")]
    GenerationExhausted(usize),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub max_term_depth: usize,
    pub max_rules: usize,
    pub signature: Signature,
    pub max_arity: usize,
    /// Size bound for generated subject terms.
    pub max_term_nodes: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            max_term_depth: 4,
            max_rules: 4,
            signature: Signature::from_symbols([("a", 0), ("b", 0), ("f", 1), ("g", 1), ("h", 2)])
                .expect("distinct symbols"),
            max_arity: 2,
            max_term_nodes: 12,
        }
    }
}

impl GenParams {
    pub fn with_seed(seed: u64) -> Self {
        GenParams {
            seed,
            ..GenParams::default()
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.max_term_depth == 0 || self.max_rules == 0 || self.max_term_nodes == 0 {
            return Err(GenError::InvalidParams(
                "depth, rule count and node bound must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The rng for case `case` of a run seeded with `seed`.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

/// Which systems [`gen_trs`] accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrsShape {
    Any,
    Orthogonal,
    /// Linear and non-ambiguous.
    LinearNonAmbiguous,
}

enum Leaves {
    Ground,
    Fresh { used: Vec<String>, reuse: bool },
    From { pool: Vec<String>, once: bool },
}

impl Leaves {
    fn has_var(&self) -> bool {
        match self {
            Leaves::Ground => false,
            Leaves::Fresh { .. } => true,
            Leaves::From { pool, .. } => !pool.is_empty(),
        }
    }

    fn take_var(&mut self, rng: &mut impl Rng) -> Term {
        match self {
            Leaves::Ground => unreachable!("no variables available"),
            Leaves::Fresh { used, reuse } => {
                if *reuse && !used.is_empty() && rng.gen_bool(0.3) {
                    return Term::Var(used.choose(rng).expect("non-empty").clone());
                }
                let name = match VAR_NAMES.get(used.len()) {
                    Some(n) => n.to_string(),
                    None => format!("x{}", used.len()),
                };
                used.push(name.clone());
                Term::Var(name)
            }
            Leaves::From { pool, once } => {
                let i = rng.gen_range(0..pool.len());
                if *once {
                    Term::Var(pool.swap_remove(i))
                } else {
                    Term::Var(pool[i].clone())
                }
            }
        }
    }
}

fn usable_symbols(sig: &Signature, max_arity: usize) -> Vec<(String, usize)> {
    sig.symbols()
        .filter(|&(_, k)| k <= max_arity)
        .map(|(f, k)| (f.to_string(), k))
        .collect()
}

/// Builds a term of depth at most `depth` with at most `budget` nodes.
/// Returns the term and its size.
fn build(
    syms: &[(String, usize)],
    depth: usize,
    budget: usize,
    leaves: &mut Leaves,
    rng: &mut impl Rng,
) -> (Term, usize) {
    // candidate slots: symbols that fit, plus two slots for a variable
    let fitting: Vec<&(String, usize)> = syms
        .iter()
        .filter(|(_, k)| *k == 0 || (depth > 1 && *k < budget))
        .collect();
    let var_slots = if leaves.has_var() { 2 } else { 0 };
    let pick = rng.gen_range(0..fitting.len() + var_slots);
    if pick >= fitting.len() {
        return (leaves.take_var(rng), 1);
    }
    let (f, k) = fitting[pick];
    let mut remaining = budget - 1;
    let mut args = Vec::with_capacity(*k);
    for i in 0..*k {
        let reserve = k - i - 1;
        let (t, used) = build(syms, depth - 1, remaining - reserve, leaves, rng);
        remaining -= used;
        args.push(t);
    }
    (Term::App(f.clone(), args), budget - remaining)
}

/// A ground term over `sig` with depth at most `params.max_term_depth` and at
/// most `params.max_term_nodes` nodes. Symbols are chosen uniformly among
/// those that still fit; at the depth frontier only constants fit.
pub fn gen_term(sig: &Signature, params: &GenParams, rng: &mut impl Rng) -> Result<Term, GenError> {
    params.validate()?;
    let syms = usable_symbols(sig, params.max_arity);
    if !syms.iter().any(|(_, k)| *k == 0) {
        return Err(GenError::NoConstant);
    }
    let (t, _) = build(
        &syms,
        params.max_term_depth,
        params.max_term_nodes,
        &mut Leaves::Ground,
        rng,
    );
    Ok(t)
}

fn gen_rule(
    syms: &[(String, usize)],
    root: &(String, usize),
    shape: TrsShape,
    depth: usize,
    rng: &mut impl Rng,
) -> (Term, Term) {
    let mut leaves = Leaves::Fresh {
        used: Vec::new(),
        reuse: shape == TrsShape::Any,
    };
    let mut remaining: usize = 7 - 1;
    let mut args = Vec::with_capacity(root.1);
    for i in 0..root.1 {
        let reserve = root.1 - i - 1;
        let (t, used) = build(
            syms,
            depth.saturating_sub(1).max(1),
            remaining - reserve,
            &mut leaves,
            rng,
        );
        remaining -= used;
        args.push(t);
    }
    let lhs = Term::App(root.0.clone(), args);
    let mut rhs_leaves = Leaves::From {
        pool: lhs.vars().into_iter().collect(),
        once: shape == TrsShape::LinearNonAmbiguous,
    };
    let (rhs, _) = build(syms, depth, 7, &mut rhs_leaves, rng);
    (lhs, rhs)
}

fn accepts(shape: TrsShape, trs: &Trs) -> bool {
    match shape {
        TrsShape::Any => true,
        TrsShape::Orthogonal => orthogonal(trs),
        TrsShape::LinearNonAmbiguous => linear_trs(trs) && !ambiguous(trs),
    }
}

/// A random TRS over `params.signature` of the requested shape.
///
/// Rules are added one at a time; a candidate that breaks the shape is
/// rejected. The first rules get distinct root symbols. After a run of
/// rejections the target rule count is lowered to what has been accepted.
pub fn gen_trs(params: &GenParams, shape: TrsShape, rng: &mut impl Rng) -> Result<Trs, GenError> {
    params.validate()?;
    let syms = usable_symbols(&params.signature, params.max_arity);
    if !syms.iter().any(|(_, k)| *k == 0) {
        return Err(GenError::NoConstant);
    }
    let depth = params.max_term_depth.min(3);
    let mut roots = syms.clone();
    roots.shuffle(rng);
    let mut target = rng.gen_range(1..=params.max_rules);
    let mut rules: Vec<(Term, Term)> = Vec::new();
    let mut rejections = 0;
    let mut streak = 0;
    while rules.len() < target {
        let root = match roots.get(rules.len()) {
            Some(r) if streak == 0 => r.clone(),
            _ => syms.choose(rng).expect("non-empty").clone(),
        };
        let mut trial = rules.clone();
        trial.push(gen_rule(&syms, &root, shape, depth, rng));
        let trs = Trs::new(params.signature.clone(), trial.clone())
            .expect("generated rules are well formed");
        if accepts(shape, &trs) {
            rules = trial;
            streak = 0;
            continue;
        }
        rejections += 1;
        streak += 1;
        if rejections >= MAX_REJECTIONS {
            return Err(GenError::GenerationExhausted(rejections));
        }
        if streak >= SHRINK_AFTER && !rules.is_empty() {
            target = rules.len();
        }
    }
    Ok(Trs::new(params.signature.clone(), rules).expect("generated rules are well formed"))
}

pub fn gen_orthogonal_trs(params: &GenParams, rng: &mut impl Rng) -> Result<Trs, GenError> {
    gen_trs(params, TrsShape::Orthogonal, rng)
}

fn merged_signature(trs: &Trs, extra: &Signature) -> Signature {
    let mut sig = trs.signature().clone();
    for (f, k) in extra.symbols() {
        if !sig.contains(f) {
            sig.declare(f, k).expect("fresh symbol");
        }
    }
    sig
}

/// A ground subject term for `trs`: a random term into which instances of
/// rule left-hand sides are planted, staying within `params.max_term_nodes`.
pub fn gen_subject(trs: &Trs, params: &GenParams, rng: &mut impl Rng) -> Result<Term, GenError> {
    let sig = merged_signature(trs, &params.signature);
    let mut t = gen_term(&sig, params, rng)?;
    let small = GenParams {
        max_term_depth: 2,
        max_term_nodes: 3,
        ..params.clone()
    };
    for _ in 0..2 {
        if trs.is_empty() || !rng.gen_bool(0.6) {
            continue;
        }
        let rule = trs.rules().choose(rng).expect("non-empty");
        let mut sigma = crate::term::Substitution::new();
        for x in rule.lhs.vars() {
            sigma.insert(x, gen_term(&sig, &small, rng)?);
        }
        let instance = sigma.apply(&rule.lhs);
        let positions = t.positions();
        let p = positions.choose(rng).expect("root exists");
        let candidate = t.replace_at(p, instance).expect("position of t");
        if candidate.size() <= params.max_term_nodes {
            t = candidate;
        }
    }
    Ok(t)
}

/// Every ground term over `sig` with at most `max_nodes` nodes, by size.
pub fn terms_up_to(sig: &Signature, max_nodes: usize) -> Vec<Term> {
    let syms: Vec<(String, usize)> = sig.symbols().map(|(f, k)| (f.to_string(), k)).collect();
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max_nodes + 1];
    for n in 1..=max_nodes {
        let mut level = Vec::new();
        for (f, k) in &syms {
            if *k == 0 {
                if n == 1 {
                    level.push(Term::constant(f));
                }
                continue;
            }
            if n < k + 1 {
                continue;
            }
            let mut args = Vec::new();
            fill_args(&by_size, *k, n - 1, &mut args, &mut |args| {
                level.push(Term::App(f.clone(), args.to_vec()))
            });
        }
        by_size[n] = level;
    }
    by_size.into_iter().flatten().collect()
}

fn fill_args(
    by_size: &[Vec<Term>],
    k: usize,
    nodes: usize,
    args: &mut Vec<Term>,
    emit: &mut impl FnMut(&[Term]),
) {
    if k == 0 {
        if nodes == 0 {
            emit(args);
        }
        return;
    }
    // leave at least one node for each later argument
    for size in 1..=nodes.saturating_sub(k - 1) {
        for t in &by_size[size] {
            args.push(t.clone());
            fill_args(by_size, k - 1, nodes - size, args, emit);
            args.pop();
        }
    }
}

/// Combinatory logic over constants `S`, `K`, `I` and binary `app`.
pub fn combinatory_logic() -> Trs {
    let ap = |l: Term, r: Term| Term::app("app", vec![l, r]);
    let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
    let (s, k, i) = (
        Term::constant("S"),
        Term::constant("K"),
        Term::constant("I"),
    );
    Trs::from_rules(vec![
        (
            ap(ap(ap(s, x.clone()), y.clone()), z.clone()),
            ap(ap(x.clone(), z.clone()), ap(y.clone(), z)),
        ),
        (ap(ap(k, x.clone()), y), x.clone()),
        (ap(i, x.clone()), x),
    ])
    .expect("well-formed rules")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    /// The checked lemma applies, so the failure is a defect here.
    Bug,
    /// The input violates the lemma's precondition.
    Expected,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Bug => "bug",
            Severity::Expected => "expected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// Case index within a suite run, 0 for direct calls.
    pub case: usize,
    pub severity: Severity,
    pub context: String,
    /// Terms of the counterexample, e.g. `[s, t1, t2]` for a divergence.
    pub witness: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub property_name: String,
    pub seed: u64,
    pub cases_run: usize,
    pub failures: Vec<Failure>,
    pub inconclusive: usize,
}

impl PropertyReport {
    pub fn new(property_name: &str, seed: u64) -> Self {
        PropertyReport {
            property_name: property_name.to_string(),
            seed,
            cases_run: 0,
            failures: Vec::new(),
            inconclusive: 0,
        }
    }

    pub fn verdict(&self) -> Verdict {
        if !self.failures.is_empty() {
            Verdict::Fail
        } else if self.cases_run > 0 {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn merge(&mut self, other: PropertyReport) {
        self.cases_run += other.cases_run;
        self.inconclusive += other.inconclusive;
        self.failures.extend(other.failures);
    }

    pub fn bugs(&self) -> usize {
        self.failures
            .iter()
            .filter(|f| f.severity == Severity::Bug)
            .count()
    }
}

#[derive(Debug, Default)]
struct Outcome {
    checks: usize,
    failures: Vec<(Severity, String, Vec<Term>)>,
    capped: bool,
}

impl Outcome {
    fn fail(&mut self, severity: Severity, context: String, witness: Vec<Term>) {
        self.failures.push((severity, context, witness));
    }
}

/// Repeatedly replaces `s` by a smaller term (a proper subterm, or `s` with a
/// subterm hoisted over its parent) while `fails` still holds.
pub fn shrink_term(s: &Term, fails: impl Fn(&Term) -> bool) -> Term {
    let mut cur = s.clone();
    'outer: loop {
        let mut candidates: BTreeSet<(usize, Term)> = BTreeSet::new();
        for p in cur.positions() {
            let sub = cur.get(&p).expect("enumerated position");
            if !p.is_root() {
                candidates.insert((sub.size(), sub.clone()));
            }
            for a in sub.args() {
                let hoisted = cur.replace_at(&p, a.clone()).expect("enumerated position");
                candidates.insert((hoisted.size(), hoisted));
            }
        }
        for (_, c) in candidates {
            if fails(&c) {
                cur = c;
                continue 'outer;
            }
        }
        return cur;
    }
}

fn finish(name: &str, trs: &Trs, s: &Term, raw: impl Fn(&Term) -> Outcome) -> PropertyReport {
    let mut out = raw(s);
    let mut subject = s.clone();
    if !out.failures.is_empty() {
        let small = shrink_term(s, |t| !raw(t).failures.is_empty());
        if small != *s {
            out = raw(&small);
            subject = small;
        }
    }
    let mut report = PropertyReport::new(name, 0);
    report.cases_run = out.checks;
    report.inconclusive = usize::from(out.capped);
    report.failures = out
        .failures
        .into_iter()
        .map(|(severity, detail, witness)| Failure {
            case: 0,
            severity,
            context: if subject == *s {
                format!("trs: {trs}; term: {s}; {detail}")
            } else {
                format!("trs: {trs}; term: {subject} (shrunk from {s}); {detail}")
            },
            witness,
        })
        .collect();
    report
}

/// Both inclusions `→ ⊆ ⇉ ⊆ →*` on `s`.
pub fn check_inclusion_chain(trs: &Trs, s: &Term) -> PropertyReport {
    finish("inclusion_chain", trs, s, |s| {
        inclusion_raw(trs, s, DEFAULT_STEP_CAP)
    })
}

fn inclusion_raw(trs: &Trs, s: &Term, cap: usize) -> Outcome {
    let mut o = Outcome::default();
    let Ok(reducts) = parallel_reducts_bounded(trs, s, cap) else {
        o.capped = true;
        return o;
    };
    let parallel: HashSet<&Term> = reducts.iter().map(|(_, t)| t).collect();
    for (r, t) in trs.one_step_reducts(s) {
        o.checks += 1;
        let lifted = lift_single(trs, s, &r).and_then(|step| apply_parallel(trs, s, &step));
        match lifted {
            Ok(u) if u == t && parallel.contains(&t) => {}
            Ok(u) => o.fail(
                Severity::Bug,
                format!(
                    "one-step reduct {t} via {r}: lifted step gives {u}, enumerated: {}",
                    parallel.contains(&t)
                ),
                vec![s.clone(), t],
            ),
            Err(e) => o.fail(
                Severity::Bug,
                format!("redex {r} does not lift: {e}"),
                vec![s.clone(), t],
            ),
        }
    }
    for (step, t) in &reducts {
        o.checks += 1;
        let seq = match serialize(trs, s, step) {
            Ok(seq) => seq,
            Err(e) => {
                o.fail(
                    Severity::Bug,
                    format!("step {step} does not serialize: {e}"),
                    vec![s.clone(), t.clone()],
                );
                continue;
            }
        };
        if seq.len() != step.len() {
            o.fail(
                Severity::Bug,
                format!("step {step} serialized to {} single steps", seq.len()),
                vec![s.clone(), t.clone()],
            );
            continue;
        }
        let mut cur = s.clone();
        let mut broken = None;
        for r in &seq {
            match trs.contract(&cur, r) {
                Ok(Some(next)) => cur = next,
                _ => {
                    broken = Some(r.clone());
                    break;
                }
            }
        }
        match broken {
            Some(r) => o.fail(
                Severity::Bug,
                format!("step {step}: {r} is not a redex of intermediate term {cur}"),
                vec![s.clone(), t.clone()],
            ),
            None if cur != *t => o.fail(
                Severity::Bug,
                format!("step {step} gives {t} but its serialization reaches {cur}"),
                vec![s.clone(), t.clone()],
            ),
            None => {}
        }
    }
    o
}

struct ReductMemo<'a> {
    trs: &'a Trs,
    cap: usize,
    sets: HashMap<Term, Option<HashSet<Term>>>,
}

impl<'a> ReductMemo<'a> {
    fn new(trs: &'a Trs, cap: usize) -> Self {
        ReductMemo {
            trs,
            cap,
            sets: HashMap::new(),
        }
    }

    /// Parallel reducts of `t`, `None` if the step cap was hit.
    fn get(&mut self, t: &Term) -> Option<&HashSet<Term>> {
        if !self.sets.contains_key(t) {
            let set = parallel_reducts_bounded(self.trs, t, self.cap)
                .ok()
                .map(|v| v.into_iter().map(|(_, u)| u).collect());
            self.sets.insert(t.clone(), set);
        }
        self.sets[t].as_ref()
    }
}

/// Diamond property of `⇉` on `s`, over all ordered pairs of parallel steps.
///
/// On orthogonal systems each pair is joined by the parallel-moves
/// construction and the join term is checked against brute-force
/// enumeration; failures there are bugs. On other systems only the
/// brute-force intersection is checked and failures are expected.
pub fn check_diamond(trs: &Trs, s: &Term) -> PropertyReport {
    let moves = ParallelMoves::new(trs).ok();
    finish("diamond", trs, s, |s| {
        diamond_raw(trs, moves.as_ref(), s, DEFAULT_STEP_CAP)
    })
}

fn diamond_raw(trs: &Trs, moves: Option<&ParallelMoves<'_>>, s: &Term, cap: usize) -> Outcome {
    let mut o = Outcome::default();
    let Ok(steps) = parallel_reducts_bounded(trs, s, cap) else {
        o.capped = true;
        return o;
    };
    let mut memo = ReductMemo::new(trs, cap);
    for (left, t1) in &steps {
        for (right, t2) in &steps {
            o.checks += 1;
            let witness = vec![s.clone(), t1.clone(), t2.clone()];
            let Some(moves) = moves else {
                let Some(r1) = memo.get(t1).cloned() else {
                    o.capped = true;
                    continue;
                };
                let Some(r2) = memo.get(t2) else {
                    o.capped = true;
                    continue;
                };
                if r1.is_disjoint(r2) {
                    o.fail(
                        Severity::Expected,
                        format!("steps {left} and {right} have no common parallel reduct"),
                        witness,
                    );
                }
                continue;
            };
            let w = match moves.join(s, left, right) {
                Ok(w) => w,
                Err(e) => {
                    o.fail(
                        Severity::Bug,
                        format!("join of {left} and {right} failed: {e}"),
                        witness,
                    );
                    continue;
                }
            };
            let u = &w.join_term;
            let from_left = apply_parallel(trs, t1, &w.step_from_left);
            let from_right = apply_parallel(trs, t2, &w.step_from_right);
            if w.left_result != *t1
                || w.right_result != *t2
                || from_left.as_ref() != Ok(u)
                || from_right.as_ref() != Ok(u)
            {
                o.fail(
                    Severity::Bug,
                    format!("witness for {left} and {right} does not validate: {w}"),
                    witness,
                );
                continue;
            }
            let in_left = memo.get(t1).map(|r| r.contains(u));
            let in_right = memo.get(t2).map(|r| r.contains(u));
            match (in_left, in_right) {
                (Some(true), Some(true)) => {}
                (None, _) | (_, None) => o.capped = true,
                _ => o.fail(
                    Severity::Bug,
                    format!("join term {u} of {left} and {right} is not a common parallel reduct"),
                    witness,
                ),
            }
        }
    }
    o
}

/// Triangle joinability of every one-step divergence from `s`.
///
/// A normal form counts as one vacuously passing check.
pub fn check_triangle(trs: &Trs, s: &Term) -> PropertyReport {
    let valid = linear_trs(trs) && !ambiguous(trs);
    finish("triangle", trs, s, |s| triangle_raw(trs, valid, s))
}

fn triangle_raw(trs: &Trs, valid: bool, s: &Term) -> Outcome {
    let mut o = Outcome::default();
    let reducts = trs.one_step_reducts(s);
    if reducts.is_empty() {
        o.checks = 1;
        return o;
    }
    let mut succ: HashMap<Term, HashSet<Term>> = HashMap::new();
    for (_, t) in &reducts {
        succ.entry(t.clone()).or_insert_with(|| {
            trs.one_step_reducts(t)
                .into_iter()
                .map(|(_, u)| u)
                .collect()
        });
    }
    // (t1 → u ∧ t2 →⁼ u) ∨ (t1 →⁼ u ∧ t2 → u), or the degenerate t1 = t2 = u
    let contract = |t1: &Term, t2: &Term, u: &Term| {
        let (s1, s2) = (&succ[t1], &succ[t2]);
        (s1.contains(u) && (t2 == u || s2.contains(u)))
            || ((t1 == u || s1.contains(u)) && s2.contains(u))
            || (t1 == t2 && t1 == u)
    };
    for (r1, t1) in &reducts {
        for (r2, t2) in &reducts {
            o.checks += 1;
            let witness = vec![s.clone(), t1.clone(), t2.clone()];
            if !valid {
                let candidates = succ[t1].iter().chain([t1, t2]).chain(&succ[t2]);
                if !candidates.into_iter().any(|u| contract(t1, t2, u)) {
                    o.fail(
                        Severity::Expected,
                        format!("divergence {r1} / {r2} is not triangle-joinable"),
                        witness,
                    );
                }
                continue;
            }
            let j = match triangle_join(trs, s, r1, r2) {
                Ok(j) => j,
                Err(e) => {
                    o.fail(
                        Severity::Bug,
                        format!("triangle join of {r1} / {r2} failed: {e}"),
                        witness,
                    );
                    continue;
                }
            };
            let u = &j.join_term;
            let side_ok = |t: &Term, r: &Option<crate::rewrite::Redex>| match r {
                None => t == u,
                Some(r) => trs.contract(t, r).ok().flatten().as_ref() == Some(u),
            };
            if j.left_result != *t1 || j.right_result != *t2 {
                o.fail(
                    Severity::Bug,
                    format!("triangle join of {r1} / {r2} reports wrong reducts"),
                    witness,
                );
            } else if !contract(t1, t2, u) {
                o.fail(
                    Severity::Bug,
                    format!("join term {u} of {r1} / {r2} violates the triangle contract"),
                    witness,
                );
            } else if !side_ok(t1, &j.from_left) || !side_ok(t2, &j.from_right) {
                o.fail(
                    Severity::Bug,
                    format!("steps of the triangle join of {r1} / {r2} do not reach {u}"),
                    witness,
                );
            }
        }
    }
    o
}

/// Bounded search for a common reduct of every one-step divergence from
/// every term reachable from `s` within `depth` steps.
///
/// A pair without a common reduct within `depth` steps on each side is
/// re-checked by an independent search before being reported. The failure
/// context says whether both closures were saturated, in which case the
/// divergence is definitely unjoinable.
pub fn check_local_confluence_bounded(trs: &Trs, s: &Term, depth: usize) -> PropertyReport {
    check_local_confluence_capped(trs, s, depth, DEFAULT_NODE_CAP)
}

pub fn check_local_confluence_capped(
    trs: &Trs,
    s: &Term,
    depth: usize,
    node_cap: usize,
) -> PropertyReport {
    let mut report = PropertyReport::new("local_confluence_bounded", 0);
    let ortho = orthogonal(trs);
    let start = match trs.reachable_set(s, depth, node_cap) {
        Ok(set) => set,
        Err(_) => {
            report.inconclusive = 1;
            return report;
        }
    };
    let mut closures: HashMap<Term, Option<Reachable>> = HashMap::new();
    let mut closure = |t: &Term| -> Option<Reachable> {
        closures
            .entry(t.clone())
            .or_insert_with(|| trs.reachable_levels(t, depth, node_cap).ok())
            .clone()
    };
    let mut capped = false;
    for t in &start {
        let reducts: Vec<Term> = trs
            .one_step_reducts(t)
            .into_iter()
            .map(|(_, u)| u)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for (i, t1) in reducts.iter().enumerate() {
            for t2 in &reducts[i + 1..] {
                report.cases_run += 1;
                let (Some(c1), Some(c2)) = (closure(t1), closure(t2)) else {
                    capped = true;
                    continue;
                };
                if !c1.terms.is_disjoint(&c2.terms) {
                    continue;
                }
                let (Some(d1), Some(d2)) = (
                    bfs_reach(trs, t1, depth, node_cap),
                    bfs_reach(trs, t2, depth, node_cap),
                ) else {
                    capped = true;
                    continue;
                };
                if !d1.is_disjoint(&d2) {
                    continue;
                }
                let definite = c1.saturated && c2.saturated;
                report.failures.push(Failure {
                    case: 0,
                    severity: if definite && ortho { Severity::Bug } else { Severity::Expected },
                    context: format!(
                        "trs: {trs}; term: {s}; {t} -> {t1} and {t} -> {t2} have no common reduct within {depth} steps; definite: {definite}"
                    ),
                    witness: vec![t.clone(), t1.clone(), t2.clone()],
                });
            }
        }
    }
    if report.cases_run == 0 && !capped {
        report.cases_run = 1;
    }
    report.inconclusive = usize::from(capped);
    report
}

/// Reachability by direct enumeration of positions and rules, independent
/// of the redex machinery of [`Trs`].
fn bfs_reach(trs: &Trs, s: &Term, depth: usize, node_cap: usize) -> Option<HashSet<Term>> {
    let mut seen = HashSet::from([s.clone()]);
    let mut frontier = vec![s.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &frontier {
            for p in t.positions() {
                let sub = t.get(&p).expect("enumerated position");
                for rule in trs.rules() {
                    if let Some(sigma) = match_term(&rule.lhs, sub) {
                        let u = t
                            .replace_at(&p, sigma.apply(&rule.rhs))
                            .expect("enumerated position");
                        if seen.insert(u.clone()) {
                            if seen.len() > node_cap {
                                return None;
                            }
                            next.push(u);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    Some(seen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Inclusion,
    Diamond,
    Triangle,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Inclusion, Suite::Diamond, Suite::Triangle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Inclusion => "inclusion_chain",
            Suite::Diamond => "diamond",
            Suite::Triangle => "triangle",
        }
    }

    pub fn shape(self) -> TrsShape {
        match self {
            Suite::Inclusion => TrsShape::Any,
            Suite::Diamond => TrsShape::Orthogonal,
            Suite::Triangle => TrsShape::LinearNonAmbiguous,
        }
    }
}

/// Runs `cases` generated systems with `terms_per_case` subjects each.
///
/// Case `i` draws from `case_rng(params.seed, i)`, cases run in parallel and
/// are merged in index order, so the report depends only on the arguments.
/// A case whose generator gives up counts as inconclusive.
pub fn run_suite(
    suite: Suite,
    params: &GenParams,
    cases: usize,
    terms_per_case: usize,
) -> PropertyReport {
    let mut subject_params = params.clone();
    if suite == Suite::Diamond {
        subject_params.max_term_nodes = subject_params.max_term_nodes.min(DIAMOND_TERM_NODES);
    }
    let results: Vec<PropertyReport> = (0..cases)
        .into_par_iter()
        .map(|case| {
            let mut report = PropertyReport::new(suite.name(), params.seed);
            let mut rng = case_rng(params.seed, case as u64);
            let trs = match gen_trs(params, suite.shape(), &mut rng) {
                Ok(trs) => trs,
                Err(_) => {
                    report.inconclusive += 1;
                    return report;
                }
            };
            for _ in 0..terms_per_case {
                let Ok(s) = gen_subject(&trs, &subject_params, &mut rng) else {
                    report.inconclusive += 1;
                    continue;
                };
                let mut r = match suite {
                    Suite::Inclusion => check_inclusion_chain(&trs, &s),
                    Suite::Diamond => check_diamond(&trs, &s),
                    Suite::Triangle => check_triangle(&trs, &s),
                };
                for f in &mut r.failures {
                    f.case = case;
                    f.context = format!("{} (replay: seed {} case {case})", f.context, params.seed);
                }
                report.merge(r);
            }
            report
        })
        .collect();
    let mut report = PropertyReport::new(suite.name(), params.seed);
    for r in results {
        report.merge(r);
    }
    report
}
