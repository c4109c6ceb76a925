//! Joining parallel divergences of orthogonal systems.
//!
//! Given `t1 ⇇ s ⇉ t2`, every redex of one step either coincides with a
//! redex of the other step, is parallel to all of them, or lies strictly
//! below one of them. In the last case non-ambiguity places it inside the
//! instance `xσ` of some lhs variable `x` of the enclosing redex `l → r`, so
//! its position splits as `π · π′ · π″` with `l|π′ = x`. Contracting the
//! nested redexes inside `xσ` yields an updated substitution `σ′`, and both
//! sides meet in `rσ′`:
//!
//! * the side that contracted the nested redexes still has `lσ′` at `π` and
//!   contracts it there;
//! * the side that contracted the enclosing redex has `rσ` at `π` and
//!   contracts the residuals `π · q · π″` for every occurrence `q` of `x` in
//!   `r` (none when `r` erases `x`, several when it duplicates it).

use std::fmt;

use thiserror::Error;

use crate::orthogonality::{ambiguous, left_linear, linear_trs, orthogonal};
use crate::parallel::{apply_parallel, replace_terms, ParallelStep, StepError};
use crate::positions::{
    choose_seq, complement_pos_le, pos_over, sub_pos, sub_pos_le, PositionError,
};
use crate::rewrite::{Redex, Trs};
use crate::term::{Position, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JoinError {
    #[error("the system is not orthogonal")]
    NotOrthogonal,
    #[error("the system is not linear and non-ambiguous")]
    PreconditionViolated,
    #[error("redex at {inner} overlaps the non-variable part of the redex at {outer}")]
    OverlapViolation { outer: Position, inner: Position },
    #[error("{0} is not a redex of the subject term")]
    InvalidRedex(Redex),
    #[error("position {position} falls outside the binding of `{var}`")]
    InvalidGeometry { var: String, position: Position },
    #[error("invalid step: {0}")]
    Step(#[from] StepError),
    #[error(transparent)]
    Position(#[from] PositionError),
    #[error("join construction failed its own check: {0}")]
    JoinedCheck(String),
}

/// One inner redex nested inside the instance of an lhs variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedEntry {
    /// `π″`: position inside `xσ`.
    pub suffix: Position,
    pub inner_rule: usize,
    pub inner_subst: Substitution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarGroup {
    pub var: String,
    /// `π′`: the unique position of `var` in the outer lhs.
    pub var_pos_in_lhs: Position,
    pub entries: Vec<NestedEntry>,
}

/// Inner redexes below an outer redex, grouped by the lhs variable whose
/// instance contains them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedDecomposition {
    pub outer_pos: Position,
    pub outer_rule: usize,
    pub outer_subst: Substitution,
    pub groups: Vec<VarGroup>,
}

impl NestedDecomposition {
    /// Full positions `outer_pos · var_pos_in_lhs · suffix` of every entry.
    pub fn inner_positions(&self) -> Vec<Position> {
        self.groups
            .iter()
            .flat_map(|g| {
                g.entries
                    .iter()
                    .map(|e| self.outer_pos.concat(&g.var_pos_in_lhs).concat(&e.suffix))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinWitness {
    pub source: Term,
    pub left_result: Term,
    pub right_result: Term,
    pub join_term: Term,
    pub step_from_left: ParallelStep,
    pub step_from_right: ParallelStep,
}

impl fmt::Display for JoinWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ⇉[{}] {} ⇇[{}] {}",
            self.left_result,
            self.step_from_left,
            self.join_term,
            self.step_from_right,
            self.right_result
        )
    }
}

/// `σ` with `x` rebound to `xσ[Π ← terms]`. Unchanged when `terms` is empty.
pub fn sigma_update(
    sigma: &Substitution,
    x: &str,
    terms: &[Term],
    positions: &[Position],
) -> Result<Substitution, JoinError> {
    if terms.len() != positions.len() {
        return Err(PositionError::LengthMismatch {
            left: terms.len(),
            right: positions.len(),
        }
        .into());
    }
    if terms.is_empty() {
        return Ok(sigma.clone());
    }
    let binding = sigma.resolve(x);
    if let Some(p) = positions.iter().find(|p| !binding.is_valid_position(p)) {
        return Err(JoinError::InvalidGeometry {
            var: x.to_string(),
            position: p.clone(),
        });
    }
    let mut out = sigma.clone();
    out.insert(x, replace_terms(&binding, terms, positions)?);
    Ok(out)
}

/// The updated substitution `σ′`.
///
/// `var_positions[i]` is the full position `π · π′` of `vars[i]`; `inner` and
/// `terms` are the whole inner step's positions and contracted right-hand
/// sides. Inner positions at or below `π · π′` update `vars[i]`; the others
/// are ignored, and unlisted variables keep their binding.
pub fn sigma_prime(
    sigma: &Substitution,
    vars: &[String],
    var_positions: &[Position],
    terms: &[Term],
    inner: &[Position],
) -> Result<Substitution, JoinError> {
    if vars.len() != var_positions.len() {
        return Err(PositionError::LengthMismatch {
            left: vars.len(),
            right: var_positions.len(),
        }
        .into());
    }
    let mut out = sigma.clone();
    for (x, q) in vars.iter().zip(var_positions) {
        let chosen = choose_seq(&sub_pos_le(inner, q), inner, terms)?;
        let suffixes = complement_pos_le(q, inner);
        let updated = sigma_update(sigma, x, &chosen, &suffixes)?;
        out.insert(x.clone(), updated.resolve(x));
    }
    Ok(out)
}

/// Groups the redexes of `inner` strictly below `outer` by the lhs variable
/// whose instance contains them. Inner redexes elsewhere are ignored.
pub fn decompose_nested(
    trs: &Trs,
    s: &Term,
    outer: &Redex,
    inner: &ParallelStep,
) -> Result<NestedDecomposition, JoinError> {
    if !matches!(trs.contract(s, outer), Ok(Some(_))) {
        return Err(JoinError::InvalidRedex(outer.clone()));
    }
    inner.validate(trs, s)?;
    let lhs = &trs.rules()[outer.rule].lhs;
    if !lhs.is_linear() {
        return Err(JoinError::NotOrthogonal);
    }
    let mut groups: Vec<VarGroup> = Vec::new();
    for r in inner.redexes() {
        if !outer.position.is_strict_prefix_of(&r.position) {
            continue;
        }
        let relative = r
            .position
            .strip_prefix(&outer.position)
            .expect("strictly below");
        let (var, var_pos) =
            variable_above(lhs, &relative).ok_or_else(|| JoinError::OverlapViolation {
                outer: outer.position.clone(),
                inner: r.position.clone(),
            })?;
        let suffix = relative.strip_prefix(&var_pos).expect("prefix");
        let entry = NestedEntry {
            suffix,
            inner_rule: r.rule,
            inner_subst: r.subst,
        };
        match groups.iter_mut().find(|g| g.var == var) {
            Some(g) => g.entries.push(entry),
            None => groups.push(VarGroup {
                var,
                var_pos_in_lhs: var_pos,
                entries: vec![entry],
            }),
        }
    }
    groups.sort_by(|a, b| a.var_pos_in_lhs.cmp(&b.var_pos_in_lhs));
    Ok(NestedDecomposition {
        outer_pos: outer.position.clone(),
        outer_rule: outer.rule,
        outer_subst: outer.subst.clone(),
        groups,
    })
}

/// The variable of `lhs` at the shortest prefix of `relative`, if the path
/// leaves the non-variable part of `lhs`.
fn variable_above(lhs: &Term, relative: &Position) -> Option<(String, Position)> {
    let mut t = lhs;
    let path = relative.path();
    for depth in 0..=path.len() {
        if let Term::Var(x) = t {
            return Some((x.clone(), Position::new(path[..depth].to_vec())));
        }
        if depth == path.len() {
            break;
        }
        t = t.args().get(path[depth] - 1)?;
    }
    None
}

/// Joins parallel divergences of one orthogonal system. Orthogonality is
/// checked once on construction.
pub struct ParallelMoves<'a> {
    trs: &'a Trs,
}

impl<'a> ParallelMoves<'a> {
    pub fn new(trs: &'a Trs) -> Result<Self, JoinError> {
        if !orthogonal(trs) {
            return Err(JoinError::NotOrthogonal);
        }
        Ok(ParallelMoves { trs })
    }

    pub fn join(
        &self,
        s: &Term,
        left: &ParallelStep,
        right: &ParallelStep,
    ) -> Result<JoinWitness, JoinError> {
        let trs = self.trs;
        let t1 = apply_parallel(trs, s, left)?;
        let t2 = apply_parallel(trs, s, right)?;

        let mut parts: Vec<(Position, Term)> = Vec::new();
        let mut from_left: Vec<Redex> = Vec::new();
        let mut from_right: Vec<Redex> = Vec::new();

        for (l, r) in left.redexes().filter_map(|l| {
            right
                .redexes()
                .find(|r| r.position == l.position)
                .map(|r| (l, r))
        }) {
            let lt = self.contracted(&l);
            if lt != self.contracted(&r) {
                return Err(JoinError::OverlapViolation {
                    outer: l.position.clone(),
                    inner: r.position,
                });
            }
            parts.push((l.position, lt));
        }

        let outer_right = pos_over(&right.positions, &left.positions);
        let outer_left = pos_over(&left.positions, &right.positions);
        Self::check_partition(right, &outer_right, left, &outer_left)?;
        Self::check_partition(left, &outer_left, right, &outer_right)?;

        for r in right
            .redexes()
            .filter(|r| outer_right.contains(&r.position))
        {
            let (u_part, residuals) = self.close_outer(s, &r, left)?;
            parts.push((r.position.clone(), u_part.1.clone()));
            from_left.push(u_part.0);
            from_right.extend(residuals);
        }
        for l in left.redexes().filter(|l| outer_left.contains(&l.position)) {
            let (u_part, residuals) = self.close_outer(s, &l, right)?;
            parts.push((l.position.clone(), u_part.1.clone()));
            from_right.push(u_part.0);
            from_left.extend(residuals);
        }

        let (positions, terms): (Vec<Position>, Vec<Term>) = parts.into_iter().unzip();
        let join_term = replace_terms(s, &terms, &positions)?;
        from_left.sort();
        from_right.sort();
        let witness = JoinWitness {
            source: s.clone(),
            left_result: t1,
            right_result: t2,
            join_term,
            step_from_left: ParallelStep::from_redexes(from_left),
            step_from_right: ParallelStep::from_redexes(from_right),
        };
        self.verify(&witness, left, right)?;
        Ok(witness)
    }

    fn contracted(&self, r: &Redex) -> Term {
        r.subst.apply(&self.trs.rules()[r.rule].rhs)
    }

    /// Every position of `step` that is neither outer nor shared with `other`
    /// must sit strictly below an outer position of `other`.
    fn check_partition(
        step: &ParallelStep,
        own_outer: &[Position],
        other: &ParallelStep,
        other_outer: &[Position],
    ) -> Result<(), JoinError> {
        for p in &step.positions {
            if own_outer.contains(p) || other.positions.contains(p) {
                continue;
            }
            if let Some(q) = other.positions.iter().find(|q| q.is_strict_prefix_of(p)) {
                if !other_outer.contains(q) {
                    return Err(JoinError::OverlapViolation {
                        outer: q.clone(),
                        inner: p.clone(),
                    });
                }
            } else {
                return Err(JoinError::OverlapViolation {
                    outer: p.clone(),
                    inner: p.clone(),
                });
            }
        }
        Ok(())
    }

    /// For an outer redex `outer` with the other step's redexes nested below:
    /// the redex `(π, l→r, σ′)` contracting it after the nested ones, the term
    /// `rσ′`, and the residual redexes of the nested ones in `rσ`.
    fn close_outer(
        &self,
        s: &Term,
        outer: &Redex,
        other: &ParallelStep,
    ) -> Result<((Redex, Term), Vec<Redex>), JoinError> {
        let rule = &self.trs.rules()[outer.rule];
        let decomposition = decompose_nested(self.trs, s, outer, other)?;
        let inner = sub_pos(&other.positions, &outer.position);
        let inner_terms: Vec<Term> = other
            .redexes()
            .filter(|r| inner.contains(&r.position))
            .map(|r| self.contracted(&r))
            .collect();
        let vars: Vec<String> = decomposition.groups.iter().map(|g| g.var.clone()).collect();
        let var_positions: Vec<Position> = decomposition
            .groups
            .iter()
            .map(|g| outer.position.concat(&g.var_pos_in_lhs))
            .collect();
        let sigma_p = sigma_prime(&outer.subst, &vars, &var_positions, &inner_terms, &inner)?;
        let joined = sigma_p.apply(&rule.rhs);

        let mut residuals = Vec::new();
        for group in &decomposition.groups {
            for q in rule.rhs.pos_var(&group.var) {
                for entry in &group.entries {
                    residuals.push(Redex {
                        position: outer.position.concat(&q).concat(&entry.suffix),
                        rule: entry.inner_rule,
                        subst: entry.inner_subst.clone(),
                    });
                }
            }
        }
        let contraction = Redex {
            position: outer.position.clone(),
            rule: outer.rule,
            subst: sigma_p,
        };
        Ok(((contraction, joined), residuals))
    }

    fn verify(
        &self,
        w: &JoinWitness,
        left: &ParallelStep,
        right: &ParallelStep,
    ) -> Result<(), JoinError> {
        let context = || {
            format!(
                "trs [{}], s = {}, left [{}], right [{}], u = {}, from left [{}], from right [{}]",
                self.trs, w.source, left, right, w.join_term, w.step_from_left, w.step_from_right
            )
        };
        let from_left = apply_parallel(self.trs, &w.left_result, &w.step_from_left)
            .map_err(|e| JoinError::JoinedCheck(format!("{e}; {}", context())))?;
        let from_right = apply_parallel(self.trs, &w.right_result, &w.step_from_right)
            .map_err(|e| JoinError::JoinedCheck(format!("{e}; {}", context())))?;
        if from_left != w.join_term || from_right != w.join_term {
            return Err(JoinError::JoinedCheck(format!(
                "left side reaches {from_left}, right side reaches {from_right}; {}",
                context()
            )));
        }
        Ok(())
    }
}

pub fn join_parallel_divergence(
    trs: &Trs,
    s: &Term,
    left: &ParallelStep,
    right: &ParallelStep,
) -> Result<JoinWitness, JoinError> {
    ParallelMoves::new(trs)?.join(s, left, right)
}

/// Closing of a one-step divergence with at most one step on each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleJoin {
    pub left_result: Term,
    pub right_result: Term,
    pub join_term: Term,
    /// `None` when the left result already is the join term.
    pub from_left: Option<Redex>,
    pub from_right: Option<Redex>,
}

pub fn triangle_join(
    trs: &Trs,
    s: &Term,
    left: &Redex,
    right: &Redex,
) -> Result<TriangleJoin, JoinError> {
    if !linear_trs(trs) || ambiguous(trs) {
        return Err(JoinError::PreconditionViolated);
    }
    debug_assert!(left_linear(trs));
    let moves = ParallelMoves { trs };
    let single = |r: &Redex| {
        if matches!(trs.contract(s, r), Ok(Some(_))) {
            Ok(ParallelStep::from_redexes([r.clone()]))
        } else {
            Err(JoinError::InvalidRedex(r.clone()))
        }
    };
    let w = moves.join(s, &single(left)?, &single(right)?)?;
    let at_most_one = |step: &ParallelStep| -> Result<Option<Redex>, JoinError> {
        match step.len() {
            0 => Ok(None),
            1 => Ok(step.redexes().next()),
            n => Err(JoinError::JoinedCheck(format!(
                "linear system produced {n} residuals for a single redex"
            ))),
        }
    };
    Ok(TriangleJoin {
        from_left: at_most_one(&w.step_from_left)?,
        from_right: at_most_one(&w.step_from_right)?,
        left_result: w.left_result,
        right_result: w.right_result,
        join_term: w.join_term,
    })
}
