//! Executable first-order term rewriting: terms and positions, one-step and
//! parallel reduction, critical pairs and orthogonality, and the constructive
//! join of parallel divergences in orthogonal systems, together with the
//! brute-force oracles that check it.

pub mod critical;
pub mod moves;
pub mod oracle;
pub mod orthogonality;
pub mod parallel;
pub mod positions;
pub mod rewrite;
pub mod syntax;
pub mod term;

pub use critical::{critical_pairs, mgu, rename_apart, CriticalPair};
pub use moves::{
    join_parallel_divergence, triangle_join, JoinError, JoinWitness, ParallelMoves, TriangleJoin,
};
pub use oracle::{GenParams, PropertyReport, Severity, Suite, Verdict};
pub use orthogonality::{analyze, OrthoReport};
pub use parallel::{apply_parallel, parallel_reducts_bounded, ParallelStep, StepError};
pub use rewrite::{match_term, CapExceeded, Redex, RewriteError, Rule, Trs};
pub use syntax::{parse_term, parse_trs, print_trs, SyntaxError};
pub use term::{Position, Signature, Substitution, Term, TermError};
