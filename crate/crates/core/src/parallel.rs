//! Parallel reduction: contracting a set of redexes at pairwise parallel
//! positions in one step.

use std::fmt;

use thiserror::Error;

use crate::positions::pos_parallel;
use crate::rewrite::{match_term, CapExceeded, Redex, Trs};
use crate::term::{Position, Substitution, Term};

/// Default bound on the number of parallel steps enumerated for one term.
pub const DEFAULT_STEP_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("step sequences differ in length: {positions} positions, {rules} rules, {substs} substitutions")]
    LengthMismatch {
        positions: usize,
        rules: usize,
        substs: usize,
    },
    #[error("positions {0} and {1} are not parallel")]
    NotParallel(Position, Position),
    #[error("position {position} is not a position of {term}")]
    InvalidPosition { position: Position, term: Term },
    #[error("no rule with id {0}")]
    InvalidRule(usize),
    #[error("item {index}: subterm at {position} is not an instance of the lhs of rule {rule}")]
    NotARedex {
        index: usize,
        position: Position,
        rule: usize,
    },
    #[error("malformed step item `{0}`, expected `position:rule`")]
    Syntax(String),
}

/// Aligned positions, rules and substitutions of one parallel step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParallelStep {
    pub positions: Vec<Position>,
    pub rules: Vec<usize>,
    pub substs: Vec<Substitution>,
}

impl ParallelStep {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_redexes(redexes: impl IntoIterator<Item = Redex>) -> Self {
        let mut step = ParallelStep::empty();
        for r in redexes {
            step.positions.push(r.position);
            step.rules.push(r.rule);
            step.substs.push(r.subst);
        }
        step
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn redexes(&self) -> impl Iterator<Item = Redex> + '_ {
        self.positions
            .iter()
            .zip(&self.rules)
            .zip(&self.substs)
            .map(|((p, &rule), subst)| Redex {
                position: p.clone(),
                rule,
                subst: subst.clone(),
            })
    }

    /// Builds a step from `(position, rule)` items, inferring each
    /// substitution by matching against `s`.
    pub fn infer(trs: &Trs, s: &Term, items: &[(Position, usize)]) -> Result<Self, StepError> {
        let mut step = ParallelStep::empty();
        for (index, (p, rule)) in items.iter().enumerate() {
            let lhs = &trs
                .rule(*rule)
                .map_err(|_| StepError::InvalidRule(*rule))?
                .lhs;
            let sub = s.get(p).ok_or_else(|| StepError::InvalidPosition {
                position: p.clone(),
                term: s.clone(),
            })?;
            let subst = match_term(lhs, sub).ok_or(StepError::NotARedex {
                index,
                position: p.clone(),
                rule: *rule,
            })?;
            step.positions.push(p.clone());
            step.rules.push(*rule);
            step.substs.push(subst);
        }
        step.validate(trs, s)?;
        Ok(step)
    }

    /// Checks every invariant of the step relative to the subject `s`.
    pub fn validate(&self, trs: &Trs, s: &Term) -> Result<(), StepError> {
        self.check_shape()?;
        for (index, ((p, &rule), subst)) in self
            .positions
            .iter()
            .zip(&self.rules)
            .zip(&self.substs)
            .enumerate()
        {
            let lhs = &trs
                .rule(rule)
                .map_err(|_| StepError::InvalidRule(rule))?
                .lhs;
            let sub = s.get(p).ok_or_else(|| StepError::InvalidPosition {
                position: p.clone(),
                term: s.clone(),
            })?;
            if subst.apply(lhs) != *sub {
                return Err(StepError::NotARedex {
                    index,
                    position: p.clone(),
                    rule,
                });
            }
        }
        Ok(())
    }

    fn check_shape(&self) -> Result<(), StepError> {
        if self.positions.len() != self.rules.len() || self.positions.len() != self.substs.len() {
            return Err(StepError::LengthMismatch {
                positions: self.positions.len(),
                rules: self.rules.len(),
                substs: self.substs.len(),
            });
        }
        check_parallel(&self.positions)
    }
}

impl fmt::Display for ParallelStep {
    /// `position:rule` items separated by commas; empty for the empty step.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, r)) in self.positions.iter().zip(&self.rules).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}:{r}")?;
        }
        Ok(())
    }
}

/// Parses `"1:1,2:1"` into `(position, rule)` items. The empty string is the empty step.
pub fn parse_step_items(text: &str) -> Result<Vec<(Position, usize)>, StepError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|item| {
            let (p, r) = item
                .split_once(':')
                .ok_or_else(|| StepError::Syntax(item.to_string()))?;
            let p = p.parse().map_err(|_| StepError::Syntax(item.to_string()))?;
            let r = r
                .trim()
                .parse()
                .map_err(|_| StepError::Syntax(item.to_string()))?;
            Ok((p, r))
        })
        .collect()
}

fn check_parallel(positions: &[Position]) -> Result<(), StepError> {
    for (i, p) in positions.iter().enumerate() {
        if let Some(q) = positions[i + 1..].iter().find(|q| !pos_parallel(p, q)) {
            return Err(StepError::NotParallel(p.clone(), q.clone()));
        }
    }
    Ok(())
}

/// Simultaneous replacement at pairwise parallel positions.
pub fn replace_terms(s: &Term, terms: &[Term], positions: &[Position]) -> Result<Term, StepError> {
    if terms.len() != positions.len() {
        return Err(StepError::LengthMismatch {
            positions: positions.len(),
            rules: terms.len(),
            substs: terms.len(),
        });
    }
    check_parallel(positions)?;
    let mut out = s.clone();
    for (t, p) in terms.iter().zip(positions) {
        out = out
            .replace_at(p, t.clone())
            .map_err(|_| StepError::InvalidPosition {
                position: p.clone(),
                term: s.clone(),
            })?;
    }
    Ok(out)
}

/// Contracts every redex of `step` in `s`, folding left to right.
pub fn apply_parallel(trs: &Trs, s: &Term, step: &ParallelStep) -> Result<Term, StepError> {
    step.validate(trs, s)?;
    let mut out = s.clone();
    for ((p, &rule), subst) in step.positions.iter().zip(&step.rules).zip(&step.substs) {
        let rhs = subst.apply(&trs.rules()[rule].rhs);
        out = out.replace_at(p, rhs).expect("validated position");
    }
    Ok(out)
}

/// All parallel steps of `s` with their results, the empty step first.
///
/// Steps are the pairwise parallel subsets of the redex list of `s`; two rules
/// matching at the same position give distinct steps.
pub fn parallel_reducts_bounded(
    trs: &Trs,
    s: &Term,
    cap: usize,
) -> Result<Vec<(ParallelStep, Term)>, CapExceeded> {
    let redexes = trs.redexes(s);
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    enumerate_subsets(trs, s, &redexes, 0, &mut chosen, &mut out, cap)?;
    Ok(out)
}

fn enumerate_subsets(
    trs: &Trs,
    s: &Term,
    redexes: &[Redex],
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<(ParallelStep, Term)>,
    cap: usize,
) -> Result<(), CapExceeded> {
    if out.len() >= cap {
        return Err(CapExceeded { cap });
    }
    let step = ParallelStep::from_redexes(chosen.iter().map(|&i| redexes[i].clone()));
    let t = apply_parallel(trs, s, &step).expect("redexes of s at parallel positions");
    out.push((step, t));
    for i in start..redexes.len() {
        let p = &redexes[i].position;
        if chosen
            .iter()
            .all(|&j| pos_parallel(&redexes[j].position, p))
        {
            chosen.push(i);
            enumerate_subsets(trs, s, redexes, i + 1, chosen, out, cap)?;
            chosen.pop();
        }
    }
    Ok(())
}

pub fn is_parallel_reduction(
    trs: &Trs,
    s: &Term,
    t: &Term,
    cap: usize,
) -> Result<bool, CapExceeded> {
    Ok(parallel_reducts_bounded(trs, s, cap)?
        .iter()
        .any(|(_, u)| u == t))
}

/// The singleton step contracting `r`.
pub fn lift_single(trs: &Trs, s: &Term, r: &Redex) -> Result<ParallelStep, StepError> {
    let step = ParallelStep::from_redexes([r.clone()]);
    step.validate(trs, s)?;
    Ok(step)
}

/// The redexes of `step` as a sequence of single steps, in step order.
pub fn serialize(trs: &Trs, s: &Term, step: &ParallelStep) -> Result<Vec<Redex>, StepError> {
    step.validate(trs, s)?;
    Ok(step.redexes().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::tests::{a, arb_term, b, f, g, h, pos, x};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn e1() -> Trs {
        Trs::from_rules(vec![(f(x()), g(x())), (a(), b())]).unwrap()
    }

    fn e1h() -> Trs {
        let sig = crate::term::Signature::from_symbols([
            ("f", 1),
            ("g", 1),
            ("a", 0),
            ("b", 0),
            ("h", 2),
        ])
        .unwrap();
        Trs::new(sig, vec![(f(x()), g(x())), (a(), b())]).unwrap()
    }

    fn e2() -> Trs {
        Trs::from_rules(vec![(f(x()), h(x(), x())), (a(), b())]).unwrap()
    }

    fn step(trs: &Trs, s: &Term, text: &str) -> ParallelStep {
        ParallelStep::infer(trs, s, &parse_step_items(text).unwrap()).unwrap()
    }

    #[test]
    fn replace_terms_examples() {
        let c = Term::constant("c");
        assert_eq!(
            replace_terms(&h(a(), a()), &[b(), b()], &[pos("1"), pos("2")]).unwrap(),
            h(b(), b())
        );
        assert_eq!(replace_terms(&f(a()), &[], &[]).unwrap(), f(a()));
        assert_eq!(
            replace_terms(&h(g(a()), a()), &[b(), c.clone()], &[pos("1.1"), pos("2")]).unwrap(),
            h(g(b()), c)
        );
        assert!(matches!(
            replace_terms(&h(a(), a()), &[b()], &[pos("1"), pos("2")]),
            Err(StepError::LengthMismatch { .. })
        ));
        assert!(matches!(
            replace_terms(&h(a(), a()), &[b(), b()], &[pos("1"), pos("1")]),
            Err(StepError::NotParallel(..))
        ));
        assert!(matches!(
            replace_terms(&h(a(), a()), &[b()], &[pos("3")]),
            Err(StepError::InvalidPosition { .. })
        ));
    }

    #[test]
    fn apply_parallel_examples() {
        let trs = e1h();
        let s = h(a(), a());
        assert_eq!(
            apply_parallel(&trs, &s, &step(&trs, &s, "1:1,2:1")).unwrap(),
            h(b(), b())
        );
        assert_eq!(apply_parallel(&trs, &s, &ParallelStep::empty()).unwrap(), s);
        let trs = e2();
        let st = ParallelStep {
            positions: vec![pos("e")],
            rules: vec![0],
            substs: vec![Substitution::from_pairs([("x", a())])],
        };
        assert_eq!(apply_parallel(&trs, &f(a()), &st).unwrap(), h(a(), a()));
    }

    #[test]
    fn apply_parallel_reports_violations() {
        let trs = e1();
        let s = f(a());
        let bad = ParallelStep {
            positions: vec![pos("e")],
            rules: vec![1],
            substs: vec![Substitution::new()],
        };
        assert_eq!(
            apply_parallel(&trs, &s, &bad),
            Err(StepError::NotARedex {
                index: 0,
                position: pos("e"),
                rule: 1
            })
        );
        let short = ParallelStep {
            positions: vec![pos("e")],
            rules: vec![],
            substs: vec![],
        };
        assert!(matches!(
            apply_parallel(&trs, &s, &short),
            Err(StepError::LengthMismatch { .. })
        ));
        let nested = ParallelStep {
            positions: vec![pos("e"), pos("1")],
            rules: vec![0, 1],
            substs: vec![Substitution::from_pairs([("x", a())]), Substitution::new()],
        };
        assert!(matches!(
            apply_parallel(&trs, &s, &nested),
            Err(StepError::NotParallel(..))
        ));
        let unknown = ParallelStep {
            positions: vec![pos("1")],
            rules: vec![9],
            substs: vec![Substitution::new()],
        };
        assert_eq!(
            apply_parallel(&trs, &s, &unknown),
            Err(StepError::InvalidRule(9))
        );
    }

    #[test]
    fn is_parallel_reduction_examples() {
        let trs = e1();
        let s = f(a());
        assert!(is_parallel_reduction(&trs, &s, &f(a()), DEFAULT_STEP_CAP).unwrap());
        assert!(is_parallel_reduction(&trs, &s, &g(a()), DEFAULT_STEP_CAP).unwrap());
        assert!(!is_parallel_reduction(&trs, &s, &g(b()), DEFAULT_STEP_CAP).unwrap());
    }

    fn reduct_set(trs: &Trs, s: &Term) -> BTreeSet<Term> {
        parallel_reducts_bounded(trs, s, DEFAULT_STEP_CAP)
            .unwrap()
            .into_iter()
            .map(|(_, t)| t)
            .collect()
    }

    #[test]
    fn parallel_reducts_examples() {
        let trs = e1();
        let all = parallel_reducts_bounded(&trs, &f(a()), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(all.len(), 3);
        assert!(all[0].0.is_empty());
        assert_eq!(
            reduct_set(&trs, &f(a())),
            BTreeSet::from([f(a()), g(a()), f(b())])
        );

        let trs = e1h();
        assert_eq!(
            reduct_set(&trs, &h(a(), a())),
            BTreeSet::from([h(a(), a()), h(b(), a()), h(a(), b()), h(b(), b())])
        );
        let nf = parallel_reducts_bounded(&trs, &g(b()), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(nf, vec![(ParallelStep::empty(), g(b()))]);
        assert_eq!(
            parallel_reducts_bounded(&trs, &h(a(), a()), 3),
            Err(CapExceeded { cap: 3 })
        );
    }

    #[test]
    fn same_position_different_rules_are_distinct_steps() {
        let c = Term::constant("c");
        let trs = Trs::from_rules(vec![(a(), b()), (a(), c.clone())]).unwrap();
        let all = parallel_reducts_bounded(&trs, &a(), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn lift_and_serialize_examples() {
        let trs = e1();
        let s = f(a());
        let r0 = Redex {
            position: pos("e"),
            rule: 0,
            subst: Substitution::from_pairs([("x", a())]),
        };
        let st = lift_single(&trs, &s, &r0).unwrap();
        assert_eq!(st.positions, vec![pos("e")]);
        assert_eq!(apply_parallel(&trs, &s, &st).unwrap(), g(a()));
        let r1 = Redex {
            position: pos("1"),
            rule: 1,
            subst: Substitution::new(),
        };
        let st = lift_single(&trs, &s, &r1).unwrap();
        assert_eq!(apply_parallel(&trs, &s, &st).unwrap(), f(b()));
        let bad = Redex {
            position: pos("e"),
            rule: 1,
            subst: Substitution::new(),
        };
        assert!(lift_single(&trs, &s, &bad).is_err());

        let trs = e1h();
        let s = h(a(), a());
        let st = step(&trs, &s, "1:1,2:1");
        let seq = serialize(&trs, &s, &st).unwrap();
        assert_eq!(
            seq.iter().map(|r| r.position.clone()).collect::<Vec<_>>(),
            vec![pos("1"), pos("2")]
        );
        let mut t = s.clone();
        for r in &seq {
            t = trs.reduce_at(&t, &r.position, r.rule).unwrap().unwrap();
        }
        assert_eq!(t, h(b(), b()));
        assert!(serialize(&trs, &s, &ParallelStep::empty())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn step_text_syntax() {
        assert!(parse_step_items("").unwrap().is_empty());
        assert_eq!(
            parse_step_items("1:1,e:0").unwrap(),
            vec![(pos("1"), 1), (pos("e"), 0)]
        );
        assert!(matches!(parse_step_items("1"), Err(StepError::Syntax(_))));
        assert!(matches!(parse_step_items("1:x"), Err(StepError::Syntax(_))));
        let trs = e1h();
        let s = h(a(), a());
        assert_eq!(step(&trs, &s, "1:1,2:1").to_string(), "1:1,2:1");
    }

    fn sample_trs() -> Trs {
        Trs::from_rules(vec![
            (f(x()), g(x())),
            (a(), b()),
            (h(x(), Term::var("y")), h(Term::var("y"), x())),
            (g(g(x())), f(x())),
        ])
        .unwrap()
    }

    proptest! {
        #[test]
        fn order_independent(s in arb_term(), seed in any::<u64>()) {
            let trs = sample_trs();
            let all = parallel_reducts_bounded(&trs, &s, 4096).unwrap();
            for (st, t) in all.iter().take(40) {
                let mut redexes: Vec<Redex> = st.redexes().collect();
                // deterministic shuffle by rotation
                if !redexes.is_empty() {
                    let k = (seed as usize) % redexes.len();
                    redexes.rotate_left(k);
                    redexes.reverse();
                }
                let permuted = ParallelStep::from_redexes(redexes);
                prop_assert_eq!(&apply_parallel(&trs, &s, &permuted).unwrap(), t);
                for q in s.positions() {
                    if st.positions.iter().all(|p| pos_parallel(p, &q)) {
                        prop_assert_eq!(t.subterm_at(&q).unwrap(), s.subterm_at(&q).unwrap());
                    }
                }
            }
        }
    }
}
