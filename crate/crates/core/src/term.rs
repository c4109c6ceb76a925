//! First-order terms over a ranked signature, positions into them, and
//! substitutions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("position {position} is not a position of {term}")]
    InvalidPosition { position: Position, term: Term },
    #[error("symbol `{symbol}` has arity {expected} but was applied to {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` already declared with arity {existing}, cannot redeclare with arity {requested}")]
    ArityConflict {
        symbol: String,
        existing: usize,
        requested: usize,
    },
    #[error("symbol names must be non-empty")]
    EmptyName,
    #[error("invalid position syntax `{0}`")]
    PositionSyntax(String),
}

/// A ranked alphabet: each function symbol has exactly one arity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a signature from `(name, arity)` pairs, rejecting conflicting arities.
    pub fn from_symbols<'a>(
        symbols: impl IntoIterator<Item = (&'a str, usize)>,
    ) -> Result<Self, TermError> {
        let mut sig = Signature::new();
        for (name, arity) in symbols {
            sig.declare(name, arity)?;
        }
        Ok(sig)
    }

    /// Declares `name/arity`. Redeclaring with the same arity is a no-op.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), TermError> {
        if name.is_empty() {
            return Err(TermError::EmptyName);
        }
        match self.symbols.get(name) {
            Some(&existing) if existing != arity => Err(TermError::ArityConflict {
                symbol: name.to_string(),
                existing,
                requested: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.symbols.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().map(|(n, &a)| (n.as_str(), a))
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.symbols().filter(|&(_, a)| a == 0).map(|(n, _)| n)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Arity-checked application.
    pub fn app(&self, head: &str, args: Vec<Term>) -> Result<Term, TermError> {
        let expected = self
            .arity(head)
            .ok_or_else(|| TermError::UnknownSymbol(head.to_string()))?;
        if expected != args.len() {
            return Err(TermError::ArityMismatch {
                symbol: head.to_string(),
                expected,
                found: args.len(),
            });
        }
        Ok(Term::App(head.to_string(), args))
    }

    /// Checks that every application in `t` uses a declared symbol at its arity.
    pub fn check(&self, t: &Term) -> Result<(), TermError> {
        match t {
            Term::Var(_) => Ok(()),
            Term::App(head, args) => {
                let expected = self
                    .arity(head)
                    .ok_or_else(|| TermError::UnknownSymbol(head.clone()))?;
                if expected != args.len() {
                    return Err(TermError::ArityMismatch {
                        symbol: head.clone(),
                        expected,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.check(a))
            }
        }
    }
}

/// A position: a path of 1-based argument indices. The empty path is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    /// Builds a position from 1-based indices. Panics on a zero index.
    pub fn new(path: Vec<usize>) -> Self {
        assert!(path.iter().all(|&i| i >= 1), "positions are 1-based");
        Position(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> Position {
        assert!(index >= 1, "positions are 1-based");
        let mut path = self.0.clone();
        path.push(index);
        Position(path)
    }

    pub fn concat(&self, suffix: &Position) -> Position {
        let mut path = self.0.clone();
        path.extend_from_slice(&suffix.0);
        Position(path)
    }

    /// `self ≤ other`: `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_strict_prefix_of(&self, other: &Position) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }

    pub fn is_parallel_to(&self, other: &Position) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    /// The `r` with `prefix · r = self`, if `prefix ≤ self`.
    pub fn strip_prefix(&self, prefix: &Position) -> Option<Position> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| Position(rest.to_vec()))
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn rest(&self) -> Position {
        Position(self.0.get(1..).unwrap_or_default().to_vec())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = TermError;

    /// Parses `e` (root) or dot-separated 1-based indices such as `1.2.1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "e" || s == "ε" {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|part| match part.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i),
                _ => Err(TermError::PositionSyntax(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Position)
    }
}

impl From<Vec<usize>> for Position {
    fn from(path: Vec<usize>) -> Self {
        Position::new(path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.to_string(), Vec::new())
    }

    /// Unchecked application; use [`Signature::app`] to validate arity.
    pub fn app(head: &str, args: Vec<Term>) -> Term {
        Term::App(head.to_string(), args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(x) => Some(x),
            Term::App(..) => None,
        }
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Term::App(f, _) => Some(f),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Variable occurrences in left-to-right order, with repetitions.
    pub fn var_occurrences(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Var(x) => out.push(x.as_str()),
                Term::App(_, args) => stack.extend(args.iter().rev()),
            }
        }
        out
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => x == y,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// All positions in pre-order, which coincides with the lexicographic order on paths.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.size());
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        for (i, arg) in self.args().iter().enumerate() {
            path.push(i + 1);
            arg.collect_positions(path, out);
            path.pop();
        }
    }

    /// Positions whose subterm is a function application.
    pub fn non_var_positions(&self) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| self.get(p).is_some_and(|t| !t.is_var()))
            .collect()
    }

    /// Positions at which the variable `x` occurs.
    pub fn pos_var(&self, x: &str) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| self.get(p).and_then(Term::as_var) == Some(x))
            .collect()
    }

    pub fn is_valid_position(&self, p: &Position) -> bool {
        self.get(p).is_some()
    }

    pub fn get(&self, p: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &p.0 {
            t = t.args().get(i.checked_sub(1)?)?;
        }
        Some(t)
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        self.get(p).ok_or_else(|| TermError::InvalidPosition {
            position: p.clone(),
            term: self.clone(),
        })
    }

    /// `self[p ← replacement]`.
    pub fn replace_at(&self, p: &Position, replacement: Term) -> Result<Term, TermError> {
        if !self.is_valid_position(p) {
            return Err(TermError::InvalidPosition {
                position: p.clone(),
                term: self.clone(),
            });
        }
        Ok(self.replace_unchecked(&p.0, replacement))
    }

    fn replace_unchecked(&self, path: &[usize], replacement: Term) -> Term {
        match (path.split_first(), self) {
            (None, _) => replacement,
            (Some((&i, rest)), Term::App(f, args)) => {
                let mut args = args.clone();
                args[i - 1] = args[i - 1].replace_unchecked(rest, replacement);
                Term::App(f.clone(), args)
            }
            (Some(_), Term::Var(_)) => unreachable!("position validated before replacement"),
        }
    }

    /// Every variable occurs at most once.
    pub fn is_linear(&self) -> bool {
        let occ = self.var_occurrences();
        let distinct: BTreeSet<&str> = occ.iter().copied().collect();
        distinct.len() == occ.len()
    }

    /// Renames every variable through `f`.
    pub fn rename_vars(&self, f: &impl Fn(&str) -> String) -> Term {
        match self {
            Term::Var(x) => Term::Var(f(x)),
            Term::App(g, args) => {
                Term::App(g.clone(), args.iter().map(|a| a.rename_vars(f)).collect())
            }
        }
    }

    /// Instance under `sigma`'s homomorphic extension.
    pub fn apply(&self, sigma: &Substitution) -> Term {
        sigma.apply(self)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(head, args) => {
                f.write_str(head)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// A finite map from variables to terms. Unbound variables map to themselves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Term)>) -> Self {
        Substitution {
            bindings: pairs.into_iter().map(|(x, t)| (x.to_string(), t)).collect(),
        }
    }

    pub fn insert(&mut self, x: impl Into<String>, t: Term) -> Option<Term> {
        self.bindings.insert(x.into(), t)
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.bindings.get(x)
    }

    /// `xσ`, defaulting to `x` itself outside the domain.
    pub fn resolve(&self, x: &str) -> Term {
        self.bindings
            .get(x)
            .cloned()
            .unwrap_or_else(|| Term::var(x))
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.bindings.iter().map(|(x, t)| (x.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(x) => self.resolve(x),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// Keeps only bindings for variables in `vars`.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> Substitution {
        let keep: BTreeSet<&str> = vars.into_iter().collect();
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(x, _)| keep.contains(x.as_str()))
                .map(|(x, t)| (x.clone(), t.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}↦{t}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        Substitution {
            bindings: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub fn a() -> Term {
        Term::constant("a")
    }
    pub fn b() -> Term {
        Term::constant("b")
    }
    pub fn x() -> Term {
        Term::var("x")
    }
    pub fn f(t: Term) -> Term {
        Term::app("f", vec![t])
    }
    pub fn g(t: Term) -> Term {
        Term::app("g", vec![t])
    }
    pub fn h(s: Term, t: Term) -> Term {
        Term::app("h", vec![s, t])
    }
    pub fn pos(s: &str) -> Position {
        s.parse().unwrap()
    }

    pub fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(Term::constant("a")),
            Just(Term::constant("b")),
            Just(Term::var("x")),
            Just(Term::var("y")),
        ];
        leaf.prop_recursive(4, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|t| Term::app("f", vec![t])),
                inner.clone().prop_map(|t| Term::app("g", vec![t])),
                (inner.clone(), inner).prop_map(|(s, t)| Term::app("h", vec![s, t])),
            ]
        })
    }

    fn node_count(t: &Term) -> usize {
        let mut n = 1;
        for a in t.args() {
            n += node_count(a);
        }
        n
    }

    #[test]
    fn vars_examples() {
        assert!(a().vars().is_empty());
        assert_eq!(f(x()).vars(), BTreeSet::from(["x".to_string()]));
        let t = h(x(), g(Term::var("y")));
        assert_eq!(t.vars(), BTreeSet::from(["x".to_string(), "y".to_string()]));
    }

    #[test]
    fn positions_examples() {
        assert_eq!(a().positions(), vec![Position::root()]);
        assert_eq!(f(a()).positions(), vec![pos("e"), pos("1")]);
        assert_eq!(
            h(a(), g(b())).positions(),
            vec![pos("e"), pos("1"), pos("2"), pos("2.1")]
        );
    }

    #[test]
    fn pos_var_examples() {
        assert_eq!(f(x()).pos_var("x"), vec![pos("1")]);
        assert_eq!(h(x(), x()).pos_var("x"), vec![pos("1"), pos("2")]);
        assert!(f(x()).pos_var("y").is_empty());
    }

    #[test]
    fn subterm_examples() {
        assert_eq!(h(a(), g(b())).subterm_at(&pos("2.1")).unwrap(), &b());
        assert_eq!(f(x()).subterm_at(&pos("e")).unwrap(), &f(x()));
        assert!(matches!(
            a().subterm_at(&pos("1")),
            Err(TermError::InvalidPosition { .. })
        ));
    }

    #[test]
    fn replace_examples() {
        assert_eq!(f(g(a())).replace_at(&pos("1.1"), b()).unwrap(), f(g(b())));
        assert_eq!(h(a(), b()).replace_at(&pos("e"), x()).unwrap(), x());
        let c = Term::constant("c");
        assert_eq!(
            h(a(), b()).replace_at(&pos("2"), c.clone()).unwrap(),
            h(a(), c)
        );
        assert!(a().replace_at(&pos("1"), b()).is_err());
    }

    #[test]
    fn subst_examples() {
        let s = Substitution::from_pairs([("x", a())]);
        assert_eq!(s.apply(&f(x())), f(a()));
        let t = h(x(), g(Term::var("y")));
        assert_eq!(Substitution::new().apply(&t), t);
        let s = Substitution::from_pairs([("x", b())]);
        assert_eq!(s.apply(&h(x(), x())), h(b(), b()));
    }

    #[test]
    fn linear_examples() {
        assert!(f(x()).is_linear());
        assert!(!h(x(), x()).is_linear());
        assert!(a().is_linear());
    }

    #[test]
    fn position_syntax() {
        assert_eq!(pos("e"), Position::root());
        assert_eq!(pos("1.2.1").path(), &[1, 2, 1]);
        assert_eq!(pos("1.2.1").to_string(), "1.2.1");
        assert_eq!(Position::root().to_string(), "e");
        assert!("0".parse::<Position>().is_err());
        assert!("1..2".parse::<Position>().is_err());
        assert!("".parse::<Position>().is_err());
    }

    #[test]
    fn signature_rejects_conflicts() {
        let mut sig = Signature::new();
        sig.declare("f", 1).unwrap();
        sig.declare("f", 1).unwrap();
        assert!(matches!(
            sig.declare("f", 2),
            Err(TermError::ArityConflict { .. })
        ));
        assert!(matches!(sig.declare("", 0), Err(TermError::EmptyName)));
        assert!(matches!(
            sig.app("f", vec![]),
            Err(TermError::ArityMismatch { .. })
        ));
        assert!(matches!(
            sig.app("k", vec![]),
            Err(TermError::UnknownSymbol(_))
        ));
    }

    proptest! {
        #[test]
        fn replace_then_read_back(t in arb_term(), u in arb_term(), idx in any::<prop::sample::Index>()) {
            let ps = t.positions();
            let p = idx.get(&ps);
            let r = t.replace_at(p, u.clone()).unwrap();
            prop_assert_eq!(r.subterm_at(p).unwrap(), &u);
            for q in &ps {
                if q.is_parallel_to(p) {
                    prop_assert_eq!(r.subterm_at(q).unwrap(), t.subterm_at(q).unwrap());
                }
            }
            prop_assert_eq!(t.replace_at(p, t.subterm_at(p).unwrap().clone()).unwrap(), t.clone());
        }

        #[test]
        fn positions_count_nodes(t in arb_term()) {
            prop_assert_eq!(t.positions().len(), node_count(&t));
            prop_assert_eq!(t.positions().len(), t.size());
        }

        #[test]
        fn substitution_commutes_with_replacement(
            t in arb_term(), u in arb_term(), s in arb_term(), idx in any::<prop::sample::Index>()
        ) {
            let sigma = Substitution::from_pairs([("x", s)]);
            let ps = t.positions();
            let p = idx.get(&ps);
            let lhs = sigma.apply(&t).replace_at(p, sigma.apply(&u)).unwrap();
            let rhs = sigma.apply(&t.replace_at(p, u).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn subst_vars_bound(t in arb_term(), s in arb_term()) {
            let sigma = Substitution::from_pairs([("x", s.clone())]);
            let out = sigma.apply(&t).vars();
            let mut allowed: BTreeSet<String> = t.vars();
            allowed.remove("x");
            if t.contains_var("x") {
                allowed.extend(s.vars());
            }
            prop_assert!(out.is_subset(&allowed));
        }

        #[test]
        fn position_text_round_trip(path in prop::collection::vec(1usize..5, 0..6)) {
            let p = Position::new(path);
            prop_assert_eq!(p.to_string().parse::<Position>().unwrap(), p);
        }
    }
}
