//! The typed target language: iso-recursive types, `let`, `roll`/`unroll`, and `err`.
//!
//! Type variables are de Bruijn indices bound by `Mu`. Term binders follow the
//! gradual language: `MatchPair` binds two (index 1 first), `Case` branches,
//! `Lam` and the body of `Let` bind one. `Hole` only occurs in cast contexts.

mod eval;
mod syntax;

pub use eval::{eval_typed, step_typed, trace_typed, TRule, TStep, TTrace};
pub use syntax::{parse_tterm, parse_ttype};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Env;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TType {
    Mu(Box<TType>),
    Var(usize),
    Unit,
    Prod(Box<TType>, Box<TType>),
    Sum(Box<TType>, Box<TType>),
    Fun(Box<TType>, Box<TType>),
}

pub type TEnv = Env<TType>;

impl TType {
    pub fn mu(body: TType) -> TType {
        TType::Mu(Box::new(body))
    }

    pub fn prod(a: TType, b: TType) -> TType {
        TType::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: TType, b: TType) -> TType {
        TType::Sum(Box::new(a), Box::new(b))
    }

    pub fn fun(a: TType, b: TType) -> TType {
        TType::Fun(Box::new(a), Box::new(b))
    }

    pub fn is_closed(&self) -> bool {
        self.closed_under(0)
    }

    fn closed_under(&self, depth: usize) -> bool {
        match self {
            TType::Var(i) => *i < depth,
            TType::Unit => true,
            TType::Mu(b) => b.closed_under(depth + 1),
            TType::Prod(a, b) | TType::Sum(a, b) | TType::Fun(a, b) => a.closed_under(depth) && b.closed_under(depth),
        }
    }

    pub fn shift(&self, by: isize, cutoff: usize) -> TType {
        match self {
            TType::Var(i) if *i >= cutoff => TType::Var((*i as isize + by) as usize),
            TType::Var(_) | TType::Unit => self.clone(),
            TType::Mu(b) => TType::mu(b.shift(by, cutoff + 1)),
            TType::Prod(a, b) => TType::prod(a.shift(by, cutoff), b.shift(by, cutoff)),
            TType::Sum(a, b) => TType::sum(a.shift(by, cutoff), b.shift(by, cutoff)),
            TType::Fun(a, b) => TType::fun(a.shift(by, cutoff), b.shift(by, cutoff)),
        }
    }

    fn subst_at(&self, index: usize, with: &TType) -> TType {
        match self {
            TType::Var(i) if *i == index => with.shift(index as isize, 0),
            TType::Var(_) | TType::Unit => self.clone(),
            TType::Mu(b) => TType::mu(b.subst_at(index + 1, with)),
            TType::Prod(a, b) => TType::prod(a.subst_at(index, with), b.subst_at(index, with)),
            TType::Sum(a, b) => TType::sum(a.subst_at(index, with), b.subst_at(index, with)),
            TType::Fun(a, b) => TType::fun(a.subst_at(index, with), b.subst_at(index, with)),
        }
    }

    /// `body[with/0]` for a body under one type binder.
    pub fn instantiate(&self, with: &TType) -> TType {
        self.subst_at(0, &with.shift(1, 0)).shift(-1, 0)
    }

    /// One unfolding of a `Mu`: the body with the `Mu` itself for the bound variable.
    pub fn unfold(&self) -> Option<TType> {
        match self {
            TType::Mu(b) => Some(b.instantiate(self)),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            TType::Var(_) | TType::Unit => 1,
            TType::Mu(b) => 1 + b.size(),
            TType::Prod(a, b) | TType::Sum(a, b) | TType::Fun(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Number of `Fun` nodes on the deepest path.
    pub fn arrow_depth(&self) -> usize {
        match self {
            TType::Var(_) | TType::Unit => 0,
            TType::Mu(b) => b.arrow_depth(),
            TType::Prod(a, b) | TType::Sum(a, b) => a.arrow_depth().max(b.arrow_depth()),
            TType::Fun(a, b) => 1 + a.arrow_depth().max(b.arrow_depth()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TTerm {
    /// The type error, ascribed with the type it is synthesized at.
    Err(TType),
    Var(usize),
    Let(Box<TTerm>, Box<TTerm>),
    /// `roll` annotated with the `Mu` type it produces.
    Roll(TType, Box<TTerm>),
    Unroll(Box<TTerm>),
    Unit,
    Pair(Box<TTerm>, Box<TTerm>),
    MatchPair(Box<TTerm>, Box<TTerm>),
    /// Injections carry the full sum type.
    Inl(TType, Box<TTerm>),
    Inr(TType, Box<TTerm>),
    Case(Box<TTerm>, Box<TTerm>, Box<TTerm>),
    Lam(TType, Box<TTerm>),
    App(Box<TTerm>, Box<TTerm>),
    Hole,
}

impl TTerm {
    pub fn let_in(bound: TTerm, body: TTerm) -> TTerm {
        TTerm::Let(Box::new(bound), Box::new(body))
    }

    pub fn roll(ty: TType, body: TTerm) -> TTerm {
        TTerm::Roll(ty, Box::new(body))
    }

    pub fn unroll(body: TTerm) -> TTerm {
        TTerm::Unroll(Box::new(body))
    }

    pub fn pair(a: TTerm, b: TTerm) -> TTerm {
        TTerm::Pair(Box::new(a), Box::new(b))
    }

    pub fn match_pair(scrutinee: TTerm, body: TTerm) -> TTerm {
        TTerm::MatchPair(Box::new(scrutinee), Box::new(body))
    }

    pub fn inl(sum: TType, body: TTerm) -> TTerm {
        TTerm::Inl(sum, Box::new(body))
    }

    pub fn inr(sum: TType, body: TTerm) -> TTerm {
        TTerm::Inr(sum, Box::new(body))
    }

    pub fn case(scrutinee: TTerm, left: TTerm, right: TTerm) -> TTerm {
        TTerm::Case(Box::new(scrutinee), Box::new(left), Box::new(right))
    }

    pub fn lam(domain: TType, body: TTerm) -> TTerm {
        TTerm::Lam(domain, Box::new(body))
    }

    pub fn app(f: TTerm, a: TTerm) -> TTerm {
        TTerm::App(Box::new(f), Box::new(a))
    }

    pub fn is_value(&self) -> bool {
        match self {
            TTerm::Var(_) | TTerm::Unit | TTerm::Lam(..) => true,
            TTerm::Roll(_, v) | TTerm::Inl(_, v) | TTerm::Inr(_, v) => v.is_value(),
            TTerm::Pair(a, b) => a.is_value() && b.is_value(),
            _ => false,
        }
    }

    pub fn is_err(&self) -> bool {
        matches!(self, TTerm::Err(_))
    }

    fn children(&self) -> Vec<&TTerm> {
        match self {
            TTerm::Err(_) | TTerm::Var(_) | TTerm::Unit | TTerm::Hole => vec![],
            TTerm::Roll(_, t) | TTerm::Unroll(t) | TTerm::Inl(_, t) | TTerm::Inr(_, t) | TTerm::Lam(_, t) => vec![t],
            TTerm::Let(a, b) | TTerm::Pair(a, b) | TTerm::MatchPair(a, b) | TTerm::App(a, b) => vec![a, b],
            TTerm::Case(s, l, r) => vec![s, l, r],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn hole_count(&self) -> usize {
        match self {
            TTerm::Hole => 1,
            _ => self.children().iter().map(|c| c.hole_count()).sum(),
        }
    }

    /// Replaces every `Hole` by `with`. No shifting: holes are never under a binder
    /// in the contexts built by this crate, and `with` is inserted verbatim.
    pub fn plug(&self, with: &TTerm) -> TTerm {
        self.map_children(&|c| c.plug(with), with)
    }

    fn map_children(&self, f: &dyn Fn(&TTerm) -> TTerm, hole: &TTerm) -> TTerm {
        match self {
            TTerm::Hole => hole.clone(),
            TTerm::Err(_) | TTerm::Var(_) | TTerm::Unit => self.clone(),
            TTerm::Let(a, b) => TTerm::let_in(f(a), f(b)),
            TTerm::Roll(ty, t) => TTerm::roll(ty.clone(), f(t)),
            TTerm::Unroll(t) => TTerm::unroll(f(t)),
            TTerm::Pair(a, b) => TTerm::pair(f(a), f(b)),
            TTerm::MatchPair(a, b) => TTerm::match_pair(f(a), f(b)),
            TTerm::Inl(ty, t) => TTerm::inl(ty.clone(), f(t)),
            TTerm::Inr(ty, t) => TTerm::inr(ty.clone(), f(t)),
            TTerm::Case(s, l, r) => TTerm::case(f(s), f(l), f(r)),
            TTerm::Lam(ty, t) => TTerm::lam(ty.clone(), f(t)),
            TTerm::App(a, b) => TTerm::app(f(a), f(b)),
        }
    }

    /// True when the single hole sits in evaluation position: every term
    /// evaluated before it is a value and no binder encloses it.
    pub fn hole_in_eval_position(&self) -> bool {
        if self.hole_count() != 1 {
            return false;
        }
        let mut t = self;
        loop {
            t = match t {
                TTerm::Hole => return true,
                TTerm::Let(a, _) | TTerm::MatchPair(a, _) | TTerm::Case(a, _, _) => a,
                TTerm::Roll(_, a) | TTerm::Unroll(a) | TTerm::Inl(_, a) | TTerm::Inr(_, a) => a,
                TTerm::Pair(a, b) | TTerm::App(a, b) => {
                    if a.hole_count() == 1 {
                        a
                    } else if a.is_value() {
                        b
                    } else {
                        return false;
                    }
                }
                _ => return false,
            };
            if t.hole_count() != 1 {
                return false;
            }
        }
    }

    pub fn shift(&self, by: isize, cutoff: usize) -> TTerm {
        match self {
            TTerm::Var(i) if *i >= cutoff => TTerm::Var((*i as isize + by) as usize),
            TTerm::Let(a, b) => TTerm::let_in(a.shift(by, cutoff), b.shift(by, cutoff + 1)),
            TTerm::MatchPair(a, b) => TTerm::match_pair(a.shift(by, cutoff), b.shift(by, cutoff + 2)),
            TTerm::Case(s, l, r) => TTerm::case(
                s.shift(by, cutoff),
                l.shift(by, cutoff + 1),
                r.shift(by, cutoff + 1),
            ),
            TTerm::Lam(ty, b) => TTerm::lam(ty.clone(), b.shift(by, cutoff + 1)),
            _ => self.map_children(&|c| c.shift(by, cutoff), &TTerm::Hole),
        }
    }

    fn subst_at(&self, index: usize, depth: usize, with: &TTerm) -> TTerm {
        match self {
            TTerm::Var(i) if *i == index + depth => with.shift(depth as isize, 0),
            TTerm::Let(a, b) => TTerm::let_in(a.subst_at(index, depth, with), b.subst_at(index, depth + 1, with)),
            TTerm::MatchPair(a, b) => {
                TTerm::match_pair(a.subst_at(index, depth, with), b.subst_at(index, depth + 2, with))
            }
            TTerm::Case(s, l, r) => TTerm::case(
                s.subst_at(index, depth, with),
                l.subst_at(index, depth + 1, with),
                r.subst_at(index, depth + 1, with),
            ),
            TTerm::Lam(ty, b) => TTerm::lam(ty.clone(), b.subst_at(index, depth + 1, with)),
            _ => self.map_children(&|c| c.subst_at(index, depth, with), &TTerm::Hole),
        }
    }

    /// `self[value/0]` for a body under one binder; the binder is removed.
    pub fn instantiate(&self, value: &TTerm) -> TTerm {
        self.subst_at(0, 0, &value.shift(1, 0)).shift(-1, 0)
    }

    pub fn instantiate2(&self, first: &TTerm, second: &TTerm) -> TTerm {
        self.instantiate(&second.shift(1, 0)).instantiate(first)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TTypeError {
    #[error("unbound variable index {0}")]
    Unbound(usize),
    #[error("a hole cannot be typed outside a cast context")]
    Hole,
    #[error("rule {rule}: {message} in `{term}`")]
    Rule {
        rule: &'static str,
        message: String,
        term: String,
    },
}

fn rule_error(rule: &'static str, t: &TTerm, message: String) -> TTypeError {
    TTypeError::Rule {
        rule,
        message,
        term: t.to_string(),
    }
}

/// Synthesizes the type of `t`. Type equality is syntactic: no implicit unfolding.
pub fn typecheck_typed(env: &TEnv, t: &TTerm) -> Result<TType, TTypeError> {
    let mut env = env.clone();
    synth(&mut env, t)
}

/// Checks `t` against `expected`. A bare `err` checks at every type.
pub fn check_typed(env: &TEnv, t: &TTerm, expected: &TType) -> Result<(), TTypeError> {
    if t.is_err() {
        return Ok(());
    }
    let found = typecheck_typed(env, t)?;
    if &found == expected {
        Ok(())
    } else {
        Err(rule_error("check", t, format!("expected {expected}, found {found}")))
    }
}

fn closed_annotation(t: &TTerm, ty: &TType) -> Result<(), TTypeError> {
    if ty.is_closed() {
        Ok(())
    } else {
        Err(rule_error("annotation", t, format!("{ty} has a free type variable")))
    }
}

fn with_binders<R>(env: &mut TEnv, tys: Vec<TType>, f: impl FnOnce(&mut TEnv) -> R) -> R {
    let n = tys.len();
    for ty in tys {
        env.push(ty);
    }
    let r = f(env);
    for _ in 0..n {
        env.pop();
    }
    r
}

fn synth(env: &mut TEnv, t: &TTerm) -> Result<TType, TTypeError> {
    match t {
        TTerm::Hole => Err(TTypeError::Hole),
        TTerm::Err(ty) => {
            closed_annotation(t, ty)?;
            Ok(ty.clone())
        }
        TTerm::Var(i) => env.lookup(*i).cloned().ok_or(TTypeError::Unbound(*i)),
        TTerm::Unit => Ok(TType::Unit),
        TTerm::Let(a, body) => {
            let ty = synth(env, a)?;
            with_binders(env, vec![ty], |env| synth(env, body))
        }
        TTerm::Roll(ty, body) => {
            closed_annotation(t, ty)?;
            let Some(unfolded) = ty.unfold() else {
                return Err(rule_error("roll", t, format!("annotation {ty} is not a mu type")));
            };
            let found = synth(env, body)?;
            if !body.is_err() && found != unfolded {
                return Err(rule_error("roll", t, format!("expected {unfolded}, found {found}")));
            }
            Ok(ty.clone())
        }
        TTerm::Unroll(body) => {
            let found = synth(env, body)?;
            found
                .unfold()
                .ok_or_else(|| rule_error("unroll", t, format!("unrolled a non-mu type {found}")))
        }
        TTerm::Pair(a, b) => Ok(TType::prod(synth(env, a)?, synth(env, b)?)),
        TTerm::MatchPair(s, body) => match synth(env, s)? {
            TType::Prod(a, b) => with_binders(env, vec![*a, *b], |env| synth(env, body)),
            other => Err(rule_error("match-pair", t, format!("scrutinee has non-product type {other}"))),
        },
        TTerm::Inl(ty, body) | TTerm::Inr(ty, body) => {
            closed_annotation(t, ty)?;
            let TType::Sum(l, r) = ty else {
                return Err(rule_error("inj", t, format!("annotation {ty} is not a sum")));
            };
            let side = if matches!(t, TTerm::Inl(..)) { l } else { r };
            let found = synth(env, body)?;
            if !body.is_err() && found != **side {
                return Err(rule_error("inj", t, format!("expected {side}, found {found}")));
            }
            Ok(ty.clone())
        }
        TTerm::Case(s, l, r) => match synth(env, s)? {
            TType::Sum(a, b) => {
                let left = with_binders(env, vec![*a], |env| branch(env, l))?;
                let right = with_binders(env, vec![*b], |env| branch(env, r))?;
                match (left, right) {
                    (Some(x), Some(y)) if x == y => Ok(x),
                    (Some(x), Some(y)) => Err(rule_error("case", t, format!("branches disagree: {x} vs {y}"))),
                    (Some(x), None) | (None, Some(x)) => Ok(x),
                    (None, None) => match &**l {
                        TTerm::Err(ty) => Ok(ty.clone()),
                        _ => unreachable!("branch() returns None only for err"),
                    },
                }
            }
            other => Err(rule_error("case", t, format!("scrutinee has non-sum type {other}"))),
        },
        TTerm::Lam(dom, body) => {
            closed_annotation(t, dom)?;
            let cod = with_binders(env, vec![dom.clone()], |env| synth(env, body))?;
            Ok(TType::fun(dom.clone(), cod))
        }
        TTerm::App(f, a) => match synth(env, f)? {
            TType::Fun(dom, cod) => {
                let found = synth(env, a)?;
                if !a.is_err() && found != *dom {
                    return Err(rule_error("app", t, format!("argument has type {found}, expected {dom}")));
                }
                Ok(*cod)
            }
            other => Err(rule_error("app", t, format!("applied a non-function of type {other}"))),
        },
    }
}

fn branch(env: &mut TEnv, t: &TTerm) -> Result<Option<TType>, TTypeError> {
    if t.is_err() {
        Ok(None)
    } else {
        synth(env, t).map(Some)
    }
}

impl fmt::Display for TType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_ttype(self))
    }
}

impl fmt::Display for TTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_tterm(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> TType {
        TType::mu(TType::sum(TType::Unit, TType::Var(0)))
    }

    #[test]
    fn unfold_substitutes_the_mu() {
        assert_eq!(nat().unfold().unwrap(), TType::sum(TType::Unit, nat()));
    }

    #[test]
    fn unroll_of_roll_types_at_the_unfolding() {
        let sum = TType::sum(TType::Unit, nat());
        let t = TTerm::unroll(TTerm::roll(nat(), TTerm::inl(sum.clone(), TTerm::Unit)));
        assert_eq!(typecheck_typed(&TEnv::new(), &t), Ok(sum));
    }

    #[test]
    fn unit_applied_is_ill_typed() {
        let t = TTerm::let_in(TTerm::Unit, TTerm::app(TTerm::Var(0), TTerm::Var(0)));
        assert!(typecheck_typed(&TEnv::new(), &t).is_err());
    }

    #[test]
    fn holes_are_rejected() {
        assert_eq!(typecheck_typed(&TEnv::new(), &TTerm::Hole), Err(TTypeError::Hole));
    }

    #[test]
    fn free_type_variable_in_annotation_is_rejected() {
        let t = TTerm::lam(TType::Var(0), TTerm::Var(0));
        assert!(typecheck_typed(&TEnv::new(), &t).is_err());
    }

    #[test]
    fn no_implicit_unfolding() {
        let t = TTerm::case(
            TTerm::roll(nat(), TTerm::inl(TType::sum(TType::Unit, nat()), TTerm::Unit)),
            TTerm::Unit,
            TTerm::Unit,
        );
        assert!(typecheck_typed(&TEnv::new(), &t).is_err());
    }

    #[test]
    fn eval_position_check() {
        let ok = TTerm::let_in(TTerm::Hole, TTerm::Var(0));
        assert!(ok.hole_in_eval_position());
        let under_binder = TTerm::lam(TType::Unit, TTerm::Hole);
        assert!(!under_binder.hole_in_eval_position());
        let after_non_value = TTerm::pair(TTerm::app(TTerm::Unit, TTerm::Unit), TTerm::Hole);
        assert!(!after_non_value.hole_in_eval_position());
        let two = TTerm::pair(TTerm::Hole, TTerm::Hole);
        assert!(!two.hole_in_eval_position());
    }

    #[test]
    fn plug_fills_the_hole() {
        let ctx = TTerm::roll(nat(), TTerm::inr(TType::sum(TType::Unit, nat()), TTerm::Hole));
        assert_eq!(ctx.plug(&TTerm::Unit).hole_count(), 0);
    }
}
