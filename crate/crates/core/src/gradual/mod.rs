//! The gradual cast calculus: types, terms, tags and the type checker.
//!
//! Terms use de Bruijn indices. `MatchPair` binds two variables in its body
//! (index 1 is the first component, index 0 the second); `Case` branches and
//! `Lam` bodies bind one.

mod eval;
mod syntax;

pub use crate::outcome::Stuck;
pub use eval::{eval_gradual, step_gradual, trace_gradual, Rule, Step, Trace};
pub use syntax::{parse_term, parse_type};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Env;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GType {
    Dyn,
    Unit,
    Prod(Box<GType>, Box<GType>),
    Sum(Box<GType>, Box<GType>),
    Fun(Box<GType>, Box<GType>),
}

pub type GEnv = Env<GType>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("the dynamic type has no tag")]
pub struct DynHasNoTag;

impl GType {
    pub fn prod(a: GType, b: GType) -> GType {
        GType::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: GType, b: GType) -> GType {
        GType::Sum(Box::new(a), Box::new(b))
    }

    pub fn fun(a: GType, b: GType) -> GType {
        GType::Fun(Box::new(a), Box::new(b))
    }

    pub fn dyn_prod() -> GType {
        GType::prod(GType::Dyn, GType::Dyn)
    }

    pub fn dyn_sum() -> GType {
        GType::sum(GType::Dyn, GType::Dyn)
    }

    pub fn dyn_fun() -> GType {
        GType::fun(GType::Dyn, GType::Dyn)
    }

    /// The four tag types, in the summand order of the dynamic type.
    pub fn tags() -> [GType; 4] {
        [
            GType::Unit,
            GType::dyn_prod(),
            GType::dyn_sum(),
            GType::dyn_fun(),
        ]
    }

    pub fn is_dyn(&self) -> bool {
        matches!(self, GType::Dyn)
    }

    pub fn is_tag(&self) -> bool {
        match self {
            GType::Unit => true,
            GType::Prod(a, b) | GType::Sum(a, b) | GType::Fun(a, b) => a.is_dyn() && b.is_dyn(),
            GType::Dyn => false,
        }
    }

    /// The tag type `⌊A⌋` underlying a non-dynamic type.
    pub fn floor(&self) -> Result<GType, DynHasNoTag> {
        match self {
            GType::Dyn => Err(DynHasNoTag),
            GType::Unit => Ok(GType::Unit),
            GType::Prod(..) => Ok(GType::dyn_prod()),
            GType::Sum(..) => Ok(GType::dyn_sum()),
            GType::Fun(..) => Ok(GType::dyn_fun()),
        }
    }

    /// Position of this tag among the summands of the dynamic type.
    pub fn tag_index(&self) -> Option<usize> {
        GType::tags().iter().position(|g| g == self)
    }

    /// Tree depth with leaves at depth 1.
    pub fn depth(&self) -> usize {
        match self {
            GType::Dyn | GType::Unit => 1,
            GType::Prod(a, b) | GType::Sum(a, b) | GType::Fun(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            GType::Dyn | GType::Unit => 1,
            GType::Prod(a, b) | GType::Sum(a, b) | GType::Fun(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Left and right components of a connective.
    pub fn parts(&self) -> Option<(&GType, &GType)> {
        match self {
            GType::Prod(a, b) | GType::Sum(a, b) | GType::Fun(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GTerm {
    /// The dynamic type error, ascribed with the type it is synthesized at.
    Err(GType),
    Var(usize),
    Cast(GType, GType, Box<GTerm>),
    Unit,
    Pair(Box<GTerm>, Box<GTerm>),
    MatchPair(Box<GTerm>, Box<GTerm>),
    /// Left injection annotated with the full sum type.
    Inl(GType, Box<GTerm>),
    Inr(GType, Box<GTerm>),
    Case(Box<GTerm>, Box<GTerm>, Box<GTerm>),
    Lam(GType, Box<GTerm>),
    App(Box<GTerm>, Box<GTerm>),
}

impl GTerm {
    pub fn cast(from: GType, to: GType, body: GTerm) -> GTerm {
        GTerm::Cast(from, to, Box::new(body))
    }

    pub fn pair(a: GTerm, b: GTerm) -> GTerm {
        GTerm::Pair(Box::new(a), Box::new(b))
    }

    pub fn match_pair(scrutinee: GTerm, body: GTerm) -> GTerm {
        GTerm::MatchPair(Box::new(scrutinee), Box::new(body))
    }

    pub fn inl(sum: GType, body: GTerm) -> GTerm {
        GTerm::Inl(sum, Box::new(body))
    }

    pub fn inr(sum: GType, body: GTerm) -> GTerm {
        GTerm::Inr(sum, Box::new(body))
    }

    pub fn case(scrutinee: GTerm, left: GTerm, right: GTerm) -> GTerm {
        GTerm::Case(Box::new(scrutinee), Box::new(left), Box::new(right))
    }

    pub fn lam(domain: GType, body: GTerm) -> GTerm {
        GTerm::Lam(domain, Box::new(body))
    }

    pub fn app(f: GTerm, a: GTerm) -> GTerm {
        GTerm::App(Box::new(f), Box::new(a))
    }

    pub fn is_value(&self) -> bool {
        match self {
            GTerm::Unit | GTerm::Lam(..) => true,
            GTerm::Pair(a, b) => a.is_value() && b.is_value(),
            GTerm::Inl(_, v) | GTerm::Inr(_, v) => v.is_value(),
            GTerm::Cast(from, to, v) => to.is_dyn() && from.is_tag() && v.is_value(),
            _ => false,
        }
    }

    pub fn is_err(&self) -> bool {
        matches!(self, GTerm::Err(_))
    }

    pub fn size(&self) -> usize {
        match self {
            GTerm::Err(_) | GTerm::Var(_) | GTerm::Unit => 1,
            GTerm::Cast(_, _, t) | GTerm::Inl(_, t) | GTerm::Inr(_, t) | GTerm::Lam(_, t) => 1 + t.size(),
            GTerm::Pair(a, b) | GTerm::MatchPair(a, b) | GTerm::App(a, b) => 1 + a.size() + b.size(),
            GTerm::Case(s, l, r) => 1 + s.size() + l.size() + r.size(),
        }
    }

    pub fn contains_err(&self) -> bool {
        match self {
            GTerm::Err(_) => true,
            GTerm::Var(_) | GTerm::Unit => false,
            GTerm::Cast(_, _, t) | GTerm::Inl(_, t) | GTerm::Inr(_, t) | GTerm::Lam(_, t) => t.contains_err(),
            GTerm::Pair(a, b) | GTerm::MatchPair(a, b) | GTerm::App(a, b) => a.contains_err() || b.contains_err(),
            GTerm::Case(s, l, r) => s.contains_err() || l.contains_err() || r.contains_err(),
        }
    }

    pub fn contains_cast(&self) -> bool {
        match self {
            GTerm::Cast(..) => true,
            GTerm::Err(_) | GTerm::Var(_) | GTerm::Unit => false,
            GTerm::Inl(_, t) | GTerm::Inr(_, t) | GTerm::Lam(_, t) => t.contains_cast(),
            GTerm::Pair(a, b) | GTerm::MatchPair(a, b) | GTerm::App(a, b) => a.contains_cast() || b.contains_cast(),
            GTerm::Case(s, l, r) => s.contains_cast() || l.contains_cast() || r.contains_cast(),
        }
    }

    /// True when no variable escapes its binders.
    pub fn is_closed(&self) -> bool {
        self.min_free_above(0)
    }

    fn min_free_above(&self, depth: usize) -> bool {
        match self {
            GTerm::Var(i) => *i < depth,
            GTerm::Err(_) | GTerm::Unit => true,
            GTerm::Cast(_, _, t) | GTerm::Inl(_, t) | GTerm::Inr(_, t) => t.min_free_above(depth),
            GTerm::Lam(_, t) => t.min_free_above(depth + 1),
            GTerm::Pair(a, b) | GTerm::App(a, b) => a.min_free_above(depth) && b.min_free_above(depth),
            GTerm::MatchPair(s, b) => s.min_free_above(depth) && b.min_free_above(depth + 2),
            GTerm::Case(s, l, r) => {
                s.min_free_above(depth) && l.min_free_above(depth + 1) && r.min_free_above(depth + 1)
            }
        }
    }

    /// Adds `by` to every variable index `>= cutoff`.
    pub fn shift(&self, by: isize, cutoff: usize) -> GTerm {
        match self {
            GTerm::Var(i) if *i >= cutoff => GTerm::Var((*i as isize + by) as usize),
            GTerm::Var(_) | GTerm::Err(_) | GTerm::Unit => self.clone(),
            GTerm::Cast(a, b, t) => GTerm::cast(a.clone(), b.clone(), t.shift(by, cutoff)),
            GTerm::Pair(a, b) => GTerm::pair(a.shift(by, cutoff), b.shift(by, cutoff)),
            GTerm::MatchPair(s, b) => GTerm::match_pair(s.shift(by, cutoff), b.shift(by, cutoff + 2)),
            GTerm::Inl(ty, t) => GTerm::inl(ty.clone(), t.shift(by, cutoff)),
            GTerm::Inr(ty, t) => GTerm::inr(ty.clone(), t.shift(by, cutoff)),
            GTerm::Case(s, l, r) => GTerm::case(
                s.shift(by, cutoff),
                l.shift(by, cutoff + 1),
                r.shift(by, cutoff + 1),
            ),
            GTerm::Lam(ty, b) => GTerm::lam(ty.clone(), b.shift(by, cutoff + 1)),
            GTerm::App(f, a) => GTerm::app(f.shift(by, cutoff), a.shift(by, cutoff)),
        }
    }

    /// Replaces variable `index` (seen from `depth` binders in) by `with`.
    fn subst_at(&self, index: usize, depth: usize, with: &GTerm) -> GTerm {
        match self {
            GTerm::Var(i) if *i == index + depth => with.shift(depth as isize, 0),
            GTerm::Var(_) | GTerm::Err(_) | GTerm::Unit => self.clone(),
            GTerm::Cast(a, b, t) => GTerm::cast(a.clone(), b.clone(), t.subst_at(index, depth, with)),
            GTerm::Pair(a, b) => GTerm::pair(a.subst_at(index, depth, with), b.subst_at(index, depth, with)),
            GTerm::MatchPair(s, b) => {
                GTerm::match_pair(s.subst_at(index, depth, with), b.subst_at(index, depth + 2, with))
            }
            GTerm::Inl(ty, t) => GTerm::inl(ty.clone(), t.subst_at(index, depth, with)),
            GTerm::Inr(ty, t) => GTerm::inr(ty.clone(), t.subst_at(index, depth, with)),
            GTerm::Case(s, l, r) => GTerm::case(
                s.subst_at(index, depth, with),
                l.subst_at(index, depth + 1, with),
                r.subst_at(index, depth + 1, with),
            ),
            GTerm::Lam(ty, b) => GTerm::lam(ty.clone(), b.subst_at(index, depth + 1, with)),
            GTerm::App(f, a) => GTerm::app(f.subst_at(index, depth, with), a.subst_at(index, depth, with)),
        }
    }

    /// `self[value/0]` for a body under one binder; the binder is removed.
    pub fn instantiate(&self, value: &GTerm) -> GTerm {
        self.subst_at(0, 0, &value.shift(1, 0)).shift(-1, 0)
    }

    /// Instantiates a `MatchPair` body with the first and second components.
    pub fn instantiate2(&self, first: &GTerm, second: &GTerm) -> GTerm {
        self.instantiate(&second.shift(1, 0)).instantiate(first)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GTypeError {
    #[error("unbound variable index {0}")]
    Unbound(usize),
    #[error("rule {rule}: {message} in `{term}`")]
    Rule {
        rule: &'static str,
        message: String,
        term: String,
    },
}

fn rule_error(rule: &'static str, t: &GTerm, message: String) -> GTypeError {
    GTypeError::Rule {
        rule,
        message,
        term: t.to_string(),
    }
}

/// Synthesizes the unique type of `t` in `env`.
pub fn typecheck_gradual(env: &GEnv, t: &GTerm) -> Result<GType, GTypeError> {
    let mut env = env.clone();
    synth(&mut env, t)
}

/// Checks `t` against `expected`. A bare `err` checks at every type.
pub fn check_gradual(env: &GEnv, t: &GTerm, expected: &GType) -> Result<(), GTypeError> {
    if t.is_err() {
        return Ok(());
    }
    let found = typecheck_gradual(env, t)?;
    if &found == expected {
        Ok(())
    } else {
        Err(rule_error("check", t, format!("expected {expected}, found {found}")))
    }
}

fn synth(env: &mut GEnv, t: &GTerm) -> Result<GType, GTypeError> {
    match t {
        GTerm::Err(ty) => Ok(ty.clone()),
        GTerm::Var(i) => env.lookup(*i).cloned().ok_or(GTypeError::Unbound(*i)),
        GTerm::Cast(from, to, body) => {
            let found = synth(env, body)?;
            if !body.is_err() && &found != from {
                return Err(rule_error(
                    "cast",
                    t,
                    format!("cast source is {from} but the body has type {found}"),
                ));
            }
            Ok(to.clone())
        }
        GTerm::Unit => Ok(GType::Unit),
        GTerm::Pair(a, b) => Ok(GType::prod(synth(env, a)?, synth(env, b)?)),
        GTerm::MatchPair(s, body) => match synth(env, s)? {
            GType::Prod(a, b) => {
                env.push(*a);
                env.push(*b);
                let r = synth(env, body);
                env.pop();
                env.pop();
                r
            }
            other => Err(rule_error("match-pair", t, format!("scrutinee has non-product type {other}"))),
        },
        GTerm::Inl(ty, body) | GTerm::Inr(ty, body) => {
            let GType::Sum(l, r) = ty else {
                return Err(rule_error("inj", t, format!("annotation {ty} is not a sum")));
            };
            let side = if matches!(t, GTerm::Inl(..)) { l } else { r };
            let found = synth(env, body)?;
            if !body.is_err() && found != **side {
                return Err(rule_error("inj", t, format!("expected {side}, found {found}")));
            }
            Ok(ty.clone())
        }
        GTerm::Case(s, l, r) => match synth(env, s)? {
            GType::Sum(a, b) => {
                env.push(*a);
                let left = branch(env, l);
                env.pop();
                env.push(*b);
                let right = branch(env, r);
                env.pop();
                match (left?, right?) {
                    (Some(x), Some(y)) if x == y => Ok(x),
                    (Some(x), Some(y)) => Err(rule_error("case", t, format!("branches disagree: {x} vs {y}"))),
                    (Some(x), None) | (None, Some(x)) => Ok(x),
                    (None, None) => match (&**l, &**r) {
                        (GTerm::Err(ty), _) => Ok(ty.clone()),
                        _ => unreachable!("branch() returns None only for err"),
                    },
                }
            }
            other => Err(rule_error("case", t, format!("scrutinee has non-sum type {other}"))),
        },
        GTerm::Lam(dom, body) => {
            env.push(dom.clone());
            let cod = synth(env, body);
            env.pop();
            Ok(GType::fun(dom.clone(), cod?))
        }
        GTerm::App(f, a) => match synth(env, f)? {
            GType::Fun(dom, cod) => {
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

/// Case branches: a bare `err` defers to the other branch.
fn branch(env: &mut GEnv, t: &GTerm) -> Result<Option<GType>, GTypeError> {
    if t.is_err() {
        Ok(None)
    } else {
        synth(env, t).map(Some)
    }
}

impl fmt::Display for GType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_type(self))
    }
}

impl fmt::Display for GTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_term(self))
    }
}
