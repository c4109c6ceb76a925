//! Rules, term rewriting systems and the one-step reduction relation.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::term::{Position, Signature, Substitution, Term, TermError};

/// Default bound on the number of distinct terms a closure may visit.
pub const DEFAULT_NODE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rule {rule}: left-hand side is a variable")]
    VarLhs { rule: usize },
    #[error(
        "rule {rule}: variable `{var}` of the right-hand side does not occur in the left-hand side"
    )]
    UnboundRhsVar { rule: usize, var: String },
    #[error("no rule with id {0}")]
    InvalidRuleId(usize),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// The search visited more distinct terms than allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("exceeded cap of {cap} terms")]
pub struct CapExceeded {
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: usize,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    /// Checks that the lhs is not a variable and that `vars(rhs) ⊆ vars(lhs)`.
    pub fn new(id: usize, lhs: Term, rhs: Term) -> Result<Rule, RewriteError> {
        if lhs.is_var() {
            return Err(RewriteError::VarLhs { rule: id });
        }
        let lhs_vars = lhs.vars();
        if let Some(var) = rhs.vars().into_iter().find(|v| !lhs_vars.contains(v)) {
            return Err(RewriteError::UnboundRhsVar { rule: id, var });
        }
        Ok(Rule { id, lhs, rhs })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trs {
    signature: Signature,
    rules: Vec<Rule>,
}

impl Trs {
    /// Builds a TRS; rule ids are assigned by list index.
    pub fn new(signature: Signature, rules: Vec<(Term, Term)>) -> Result<Trs, RewriteError> {
        let rules = rules
            .into_iter()
            .enumerate()
            .map(|(id, (lhs, rhs))| {
                signature.check(&lhs)?;
                signature.check(&rhs)?;
                Rule::new(id, lhs, rhs)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trs { signature, rules })
    }

    /// Builds a TRS whose signature is inferred from the rules.
    pub fn from_rules(rules: Vec<(Term, Term)>) -> Result<Trs, RewriteError> {
        let mut signature = Signature::new();
        for (l, r) in &rules {
            declare_symbols(&mut signature, l)?;
            declare_symbols(&mut signature, r)?;
        }
        Trs::new(signature, rules)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> Result<&Rule, RewriteError> {
        self.rules.get(id).ok_or(RewriteError::InvalidRuleId(id))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The same signature with the rule at `id` dropped and ids renumbered.
    pub fn without_rule(&self, id: usize) -> Trs {
        let rules = self
            .rules
            .iter()
            .filter(|r| r.id != id)
            .enumerate()
            .map(|(i, r)| Rule {
                id: i,
                lhs: r.lhs.clone(),
                rhs: r.rhs.clone(),
            })
            .collect();
        Trs {
            signature: self.signature.clone(),
            rules,
        }
    }

    /// Contracts the redex of rule `rule` at `p`, or `None` if it does not match there.
    pub fn reduce_at(
        &self,
        s: &Term,
        p: &Position,
        rule: usize,
    ) -> Result<Option<Term>, RewriteError> {
        let rule = self.rule(rule)?;
        let sub = s.subterm_at(p)?;
        Ok(match match_term(&rule.lhs, sub) {
            Some(sigma) => Some(s.replace_at(p, sigma.apply(&rule.rhs))?),
            None => None,
        })
    }

    /// Every redex of `s`, ordered by position then rule id.
    pub fn redexes(&self, s: &Term) -> Vec<Redex> {
        let mut out = Vec::new();
        for p in s.positions() {
            let sub = s.get(&p).expect("enumerated position");
            for rule in &self.rules {
                if let Some(subst) = match_term(&rule.lhs, sub) {
                    out.push(Redex {
                        position: p.clone(),
                        rule: rule.id,
                        subst,
                    });
                }
            }
        }
        out
    }

    /// Contracts `r` in `s`, checking that it really is a redex of `s`.
    pub fn contract(&self, s: &Term, r: &Redex) -> Result<Option<Term>, RewriteError> {
        let rule = self.rule(r.rule)?;
        let sub = s.subterm_at(&r.position)?;
        if r.subst.apply(&rule.lhs) != *sub {
            return Ok(None);
        }
        Ok(Some(s.replace_at(&r.position, r.subst.apply(&rule.rhs))?))
    }

    pub fn one_step_reducts(&self, s: &Term) -> Vec<(Redex, Term)> {
        self.redexes(s)
            .into_iter()
            .map(|r| {
                let rhs = &self.rules[r.rule].rhs;
                let t = s
                    .replace_at(&r.position, r.subst.apply(rhs))
                    .expect("redex position is valid");
                (r, t)
            })
            .collect()
    }

    pub fn is_reduction(&self, s: &Term, t: &Term) -> bool {
        self.one_step_reducts(s).iter().any(|(_, u)| u == t)
    }

    pub fn is_normal_form(&self, s: &Term) -> bool {
        s.positions().iter().all(|p| {
            let sub = s.get(p).expect("enumerated position");
            self.rules.iter().all(|r| match_term(&r.lhs, sub).is_none())
        })
    }

    /// Terms reachable from `s` in at most `depth` steps, `s` included.
    pub fn reachable_set(
        &self,
        s: &Term,
        depth: usize,
        node_cap: usize,
    ) -> Result<BTreeSet<Term>, CapExceeded> {
        self.reachable_levels(s, depth, node_cap).map(|r| r.terms)
    }

    /// Breadth-first closure that also reports whether it saturated, i.e.
    /// whether the last level produced nothing new.
    pub fn reachable_levels(
        &self,
        s: &Term,
        depth: usize,
        node_cap: usize,
    ) -> Result<Reachable, CapExceeded> {
        let mut seen: HashSet<Term> = HashSet::from([s.clone()]);
        if seen.len() > node_cap {
            return Err(CapExceeded { cap: node_cap });
        }
        let mut frontier = vec![s.clone()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for t in &frontier {
                for (_, u) in self.one_step_reducts(t) {
                    if seen.insert(u.clone()) {
                        if seen.len() > node_cap {
                            return Err(CapExceeded { cap: node_cap });
                        }
                        next.push(u);
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        let saturated = frontier.iter().all(|t| {
            self.one_step_reducts(t)
                .iter()
                .all(|(_, u)| seen.contains(u))
        });
        Ok(Reachable {
            terms: seen.into_iter().collect(),
            saturated,
        })
    }

    /// Leftmost-innermost rewriting; `None` if `fuel` steps do not reach a normal form.
    pub fn normalize(&self, s: &Term, fuel: usize) -> Option<Term> {
        let mut t = s.clone();
        for _ in 0..fuel {
            match self.leftmost_innermost(&t) {
                None => return Some(t),
                Some(r) => {
                    t = self
                        .contract(&t, &r)
                        .expect("valid redex")
                        .expect("redex matches");
                }
            }
        }
        self.is_normal_form(&t).then_some(t)
    }

    fn leftmost_innermost(&self, s: &Term) -> Option<Redex> {
        fn go(trs: &Trs, t: &Term, path: &mut Vec<usize>) -> Option<Redex> {
            for (i, arg) in t.args().iter().enumerate() {
                path.push(i + 1);
                let found = go(trs, arg, path);
                path.pop();
                if found.is_some() {
                    return found;
                }
            }
            trs.rules.iter().find_map(|rule| {
                match_term(&rule.lhs, t).map(|subst| Redex {
                    position: Position::new(path.clone()),
                    rule: rule.id,
                    subst,
                })
            })
        }
        go(self, s, &mut Vec::new())
    }
}

impl fmt::Display for Trs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

fn declare_symbols(sig: &mut Signature, t: &Term) -> Result<(), TermError> {
    if let Term::App(f, args) = t {
        sig.declare(f, args.len())?;
        for a in args {
            declare_symbols(sig, a)?;
        }
    }
    Ok(())
}

/// Result of [`Trs::reachable_levels`].
#[derive(Debug, Clone)]
pub struct Reachable {
    pub terms: BTreeSet<Term>,
    /// No term outside `terms` is reachable at all.
    pub saturated: bool,
}

/// A reducible occurrence: `s|position = lhs(rule)·subst`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Redex {
    pub position: Position,
    pub rule: usize,
    pub subst: Substitution,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{} {}", self.position, self.rule, self.subst)
    }
}

/// First-order matching: the minimal `σ` with `pattern·σ = subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut stack = vec![(pattern, subject)];
    while let Some((p, s)) = stack.pop() {
        match p {
            Term::Var(x) => match sigma.get(x) {
                Some(bound) if bound != s => return None,
                Some(_) => {}
                None => {
                    sigma.insert(x.clone(), s.clone());
                }
            },
            Term::App(f, pargs) => match s {
                Term::App(g, sargs) if f == g && pargs.len() == sargs.len() => {
                    stack.extend(pargs.iter().zip(sargs));
                }
                _ => return None,
            },
        }
    }
    Some(sigma)
}
