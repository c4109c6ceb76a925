//! Sequences of positions and the functions that classify the positions of a
//! parallel divergence: `sub_pos`, `pos_over`, `complement_pos`, `index` and
//! `choose_seq`.
//!
//! Every function preserves the order of its input sequence.

use std::collections::HashSet;
use std::ops::Deref;

use thiserror::Error;

use crate::term::{Position, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("duplicate position {0} in sequence")]
    Duplicate(Position),
    #[error("positions {0} and {1} are not parallel")]
    NotParallel(Position, Position),
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("position {position} is not a position of {term}")]
    NotInTerm { position: Position, term: Term },
}

/// An ordered sequence of distinct positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PositionSeq(Vec<Position>);

impl PositionSeq {
    pub fn new(items: Vec<Position>) -> Result<Self, PositionError> {
        let mut seen = HashSet::with_capacity(items.len());
        for p in &items {
            if !seen.insert(p) {
                return Err(PositionError::Duplicate(p.clone()));
            }
        }
        Ok(PositionSeq(items))
    }

    pub fn empty() -> Self {
        PositionSeq(Vec::new())
    }

    pub fn into_vec(self) -> Vec<Position> {
        self.0
    }
}

impl Deref for PositionSeq {
    type Target = [Position];

    fn deref(&self) -> &[Position] {
        &self.0
    }
}

/// An ordered sequence of pairwise parallel positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParallelPositionSeq(Vec<Position>);

impl ParallelPositionSeq {
    pub fn new(items: Vec<Position>) -> Result<Self, PositionError> {
        for (i, p) in items.iter().enumerate() {
            for q in &items[i + 1..] {
                if !pos_parallel(p, q) {
                    return Err(PositionError::NotParallel(p.clone(), q.clone()));
                }
            }
        }
        Ok(ParallelPositionSeq(items))
    }

    pub fn empty() -> Self {
        ParallelPositionSeq(Vec::new())
    }

    /// Checks that every item addresses a subterm of `t`.
    pub fn check_within(&self, t: &Term) -> Result<(), PositionError> {
        match self.0.iter().find(|p| !t.is_valid_position(p)) {
            Some(p) => Err(PositionError::NotInTerm {
                position: p.clone(),
                term: t.clone(),
            }),
            None => Ok(()),
        }
    }

    pub fn into_vec(self) -> Vec<Position> {
        self.0
    }
}

impl Deref for ParallelPositionSeq {
    type Target = [Position];

    fn deref(&self) -> &[Position] {
        &self.0
    }
}

impl From<ParallelPositionSeq> for PositionSeq {
    fn from(seq: ParallelPositionSeq) -> Self {
        // parallel positions are in particular distinct
        PositionSeq(seq.0)
    }
}

pub fn pos_leq(p: &Position, q: &Position) -> bool {
    p.is_prefix_of(q)
}

pub fn pos_parallel(p: &Position, q: &Position) -> bool {
    p.is_parallel_to(q)
}

pub fn is_pp(seq: &[Position]) -> bool {
    seq.iter()
        .enumerate()
        .all(|(i, p)| seq[i + 1..].iter().all(|q| pos_parallel(p, q)))
}

/// Items of `seq` strictly below `p`.
pub fn sub_pos(seq: &[Position], p: &Position) -> Vec<Position> {
    seq.iter()
        .filter(|q| p.is_strict_prefix_of(q))
        .cloned()
        .collect()
}

/// Items of `seq` at or below `p`.
pub fn sub_pos_le(seq: &[Position], p: &Position) -> Vec<Position> {
    seq.iter().filter(|q| p.is_prefix_of(q)).cloned().collect()
}

/// Items `q` of `outer` that either have some item of `inner` strictly below
/// them or are parallel to every item of `inner` (with `inner` itself
/// pairwise parallel).
pub fn pos_over(outer: &[Position], inner: &[Position]) -> Vec<Position> {
    let inner_pp = is_pp(inner);
    outer
        .iter()
        .filter(|q| {
            inner.iter().any(|r| q.is_strict_prefix_of(r))
                || (inner_pp && inner.iter().all(|r| pos_parallel(q, r)))
        })
        .cloned()
        .collect()
}

/// For each item strictly below `p`, the suffix left after removing `p`.
pub fn complement_pos(p: &Position, seq: &[Position]) -> Vec<Position> {
    seq.iter()
        .filter(|q| p.is_strict_prefix_of(q))
        .filter_map(|q| q.strip_prefix(p))
        .collect()
}

/// Like [`complement_pos`] but also keeps `p` itself, as the root suffix.
pub fn complement_pos_le(p: &Position, seq: &[Position]) -> Vec<Position> {
    seq.iter().filter_map(|q| q.strip_prefix(p)).collect()
}

/// 0-based index of the first occurrence of `p`, or `seq.len()` when absent.
pub fn index(seq: &[Position], p: &Position) -> usize {
    seq.iter().position(|q| q == p).unwrap_or(seq.len())
}

/// For each position of `selection` found in `keys`, the value aligned with it
/// in `values`. Positions absent from `keys` are skipped.
pub fn choose_seq<V: Clone>(
    selection: &[Position],
    keys: &[Position],
    values: &[V],
) -> Result<Vec<V>, PositionError> {
    if keys.len() != values.len() {
        return Err(PositionError::LengthMismatch {
            left: keys.len(),
            right: values.len(),
        });
    }
    Ok(selection
        .iter()
        .map(|p| index(keys, p))
        .filter(|&i| i < keys.len())
        .map(|i| values[i].clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(items: &[&str]) -> Vec<Position> {
        items.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn p(s: &str) -> Position {
        s.parse().unwrap()
    }

    #[test]
    fn order_and_parallelism() {
        assert!(pos_leq(&p("e"), &p("1.2")));
        assert!(pos_leq(&p("1"), &p("1.2")));
        assert!(!pos_leq(&p("1.2"), &p("1")));
        assert!(pos_parallel(&p("1"), &p("2")));
        assert!(!pos_parallel(&p("1"), &p("1.1")));
        assert!(!pos_parallel(&p("1"), &p("1")));
    }

    #[test]
    fn is_pp_examples() {
        assert!(is_pp(&ps(&["1.1", "1.2", "2"])));
        assert!(!is_pp(&ps(&["1", "1.2"])));
        assert!(is_pp(&[]));
    }

    #[test]
    fn sub_pos_examples() {
        assert_eq!(
            sub_pos(&ps(&["1.1", "2", "1.2"]), &p("1")),
            ps(&["1.1", "1.2"])
        );
        assert!(sub_pos(&ps(&["1"]), &p("1")).is_empty());
        assert_eq!(sub_pos(&ps(&["1", "2.1"]), &p("e")), ps(&["1", "2.1"]));
        assert_eq!(sub_pos_le(&ps(&["1", "2.1"]), &p("1")), ps(&["1"]));
    }

    #[test]
    fn pos_over_examples() {
        assert_eq!(pos_over(&ps(&["e"]), &ps(&["1", "2"])), ps(&["e"]));
        assert_eq!(pos_over(&ps(&["1"]), &ps(&["2"])), ps(&["1"]));
        assert!(pos_over(&ps(&["1"]), &ps(&["1"])).is_empty());
        assert_eq!(pos_over(&ps(&["1", "2.1"]), &[]), ps(&["1", "2.1"]));
    }

    #[test]
    fn complement_pos_examples() {
        assert_eq!(
            complement_pos(&p("1"), &ps(&["1.1", "2", "1.2.1"])),
            ps(&["1", "2.1"])
        );
        assert_eq!(complement_pos(&p("e"), &ps(&["1", "2"])), ps(&["1", "2"]));
        assert!(complement_pos(&p("2"), &ps(&["1"])).is_empty());
        assert_eq!(complement_pos_le(&p("1"), &ps(&["1", "2"])), ps(&["e"]));
    }

    #[test]
    fn index_examples() {
        assert_eq!(index(&ps(&["1", "2", "3"]), &p("2")), 1);
        assert_eq!(index(&ps(&["1", "2"]), &p("3")), 2);
        assert_eq!(index(&[], &p("e")), 0);
    }

    #[test]
    fn choose_seq_examples() {
        let keys = ps(&["1", "2", "3"]);
        let vals = ["A", "B", "C"];
        assert_eq!(choose_seq(&ps(&["2"]), &keys, &vals).unwrap(), vec!["B"]);
        assert!(choose_seq(&[], &ps(&["1", "2"]), &["A", "B"])
            .unwrap()
            .is_empty());
        assert_eq!(
            choose_seq(&ps(&["2", "3"]), &keys, &vals).unwrap(),
            vec!["B", "C"]
        );
        assert_eq!(
            choose_seq(&ps(&["4"]), &keys, &vals).unwrap(),
            Vec::<&str>::new()
        );
        assert!(matches!(
            choose_seq(&ps(&["1"]), &keys, &["A"]),
            Err(PositionError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn sequences_validate() {
        assert!(matches!(
            PositionSeq::new(ps(&["1", "1"])),
            Err(PositionError::Duplicate(_))
        ));
        assert!(matches!(
            ParallelPositionSeq::new(ps(&["1", "1.2"])),
            Err(PositionError::NotParallel(..))
        ));
        let seq = ParallelPositionSeq::new(ps(&["1", "2"])).unwrap();
        assert!(seq
            .check_within(&crate::term::Term::app("f", vec![]))
            .is_err());
    }

    fn arb_position() -> impl Strategy<Value = Position> {
        prop::collection::vec(1usize..4, 0..4).prop_map(Position::new)
    }

    fn arb_parallel_seq() -> impl Strategy<Value = Vec<Position>> {
        prop::collection::vec(arb_position(), 0..8).prop_map(|cands| {
            let mut out: Vec<Position> = Vec::new();
            for c in cands {
                if out.iter().all(|q| pos_parallel(q, &c)) {
                    out.push(c);
                }
            }
            out
        })
    }

    proptest! {
        #[test]
        fn complement_matches_sub_pos(p in arb_position(), seq in arb_parallel_seq()) {
            let comp = complement_pos(&p, &seq);
            let sub = sub_pos(&seq, &p);
            prop_assert_eq!(comp.len(), sub.len());
            for (c, s) in comp.iter().zip(&sub) {
                prop_assert_eq!(&p.concat(c), s);
            }
            prop_assert!(is_pp(&comp));
            prop_assert!(is_pp(&sub));
        }

        #[test]
        fn pos_over_is_subsequence(a in arb_parallel_seq(), b in arb_parallel_seq()) {
            let over = pos_over(&a, &b);
            let mut it = a.iter();
            for q in &over {
                prop_assert!(it.any(|r| r == q));
            }
            prop_assert_eq!(pos_over(&a, &[]), a);
        }

        #[test]
        fn choose_sub_pos_length(p in arb_position(), seq in arb_parallel_seq()) {
            let vals: Vec<usize> = (0..seq.len()).collect();
            let sub = sub_pos(&seq, &p);
            prop_assert_eq!(choose_seq(&sub, &seq, &vals).unwrap().len(), sub.len());
        }
    }
}
