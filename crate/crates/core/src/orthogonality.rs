//! Linearity, ambiguity and orthogonality of a TRS.

use std::collections::BTreeMap;

use crate::critical::{critical_pairs, CriticalPair};
use crate::rewrite::Trs;

/// Number of critical pairs kept in [`OrthoReport::sample_cps`].
pub const SAMPLE_CP_LIMIT: usize = 10;

pub fn left_linear(trs: &Trs) -> bool {
    trs.rules().iter().all(|r| r.lhs.is_linear())
}

pub fn right_linear(trs: &Trs) -> bool {
    trs.rules().iter().all(|r| r.rhs.is_linear())
}

pub fn linear_trs(trs: &Trs) -> bool {
    left_linear(trs) && right_linear(trs)
}

pub fn ambiguous(trs: &Trs) -> bool {
    !critical_pairs(trs).is_empty()
}

pub fn orthogonal(trs: &Trs) -> bool {
    left_linear(trs) && !ambiguous(trs)
}

/// A left-nonlinear variable occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonLinearVar {
    pub rule: usize,
    pub var: String,
    pub occurrences: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthoReport {
    pub left_linear: bool,
    pub right_linear: bool,
    pub linear: bool,
    pub ambiguous: bool,
    pub orthogonal: bool,
    /// Every critical pair is trivial. Informational only: trivial pairs
    /// still make the system ambiguous.
    pub weakly_orthogonal: bool,
    pub offending_rules: Vec<NonLinearVar>,
    pub critical_pair_count: usize,
    pub sample_cps: Vec<CriticalPair>,
}

pub fn analyze(trs: &Trs) -> OrthoReport {
    let offending_rules = trs
        .rules()
        .iter()
        .flat_map(|rule| {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for v in rule.lhs.var_occurrences() {
                *counts.entry(v).or_default() += 1;
            }
            counts
                .into_iter()
                .filter(|&(_, n)| n > 1)
                .map(|(v, n)| NonLinearVar {
                    rule: rule.id,
                    var: v.to_string(),
                    occurrences: n,
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let cps = critical_pairs(trs);
    let left_linear = offending_rules.is_empty();
    let right_linear = right_linear(trs);
    let ambiguous = !cps.is_empty();
    OrthoReport {
        left_linear,
        right_linear,
        linear: left_linear && right_linear,
        ambiguous,
        orthogonal: left_linear && !ambiguous,
        weakly_orthogonal: left_linear && cps.iter().all(|cp| cp.trivial),
        offending_rules,
        critical_pair_count: cps.len(),
        sample_cps: cps.into_iter().take(SAMPLE_CP_LIMIT).collect(),
    }
}
