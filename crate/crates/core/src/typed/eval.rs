//! Weighted call-by-value semantics: `unroll (roll v)` costs one, everything else zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{TTerm, TType};
use crate::outcome::{Outcome, Stuck, WeightedOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TRule {
    Let,
    Unroll,
    MatchPair,
    Beta,
    CaseInl,
    CaseInr,
    ErrProp,
}

impl TRule {
    pub fn weight(self) -> u64 {
        u64::from(self == TRule::Unroll)
    }

    pub fn name(self) -> &'static str {
        match self {
            TRule::Let => "Let",
            TRule::Unroll => "Unroll",
            TRule::MatchPair => "MatchPair",
            TRule::Beta => "Beta",
            TRule::CaseInl => "CaseInl",
            TRule::CaseInr => "CaseInr",
            TRule::ErrProp => "ErrProp",
        }
    }
}

impl fmt::Display for TRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TStep {
    Stepped(TTerm, TRule),
    Terminal,
}

enum Focus {
    Value,
    Abort(TType),
    Reduced(TTerm, TRule),
}

fn stuck(t: &TTerm) -> Stuck {
    Stuck(t.to_string())
}

/// One step of a closed, hole-free term. The weight is `rule.weight()`.
pub fn step_typed(t: &TTerm) -> Result<TStep, Stuck> {
    if t.is_err() {
        return Ok(TStep::Terminal);
    }
    Ok(match focus(t)? {
        Focus::Value => TStep::Terminal,
        Focus::Abort(ty) => TStep::Stepped(TTerm::Err(ty), TRule::ErrProp),
        Focus::Reduced(t2, rule) => TStep::Stepped(t2, rule),
    })
}

fn under(sub: &TTerm, wrap: impl FnOnce(TTerm) -> TTerm) -> Result<Option<Focus>, Stuck> {
    Ok(match focus(sub)? {
        Focus::Value => None,
        Focus::Abort(ty) => Some(Focus::Abort(ty)),
        Focus::Reduced(s, rule) => Some(Focus::Reduced(wrap(s), rule)),
    })
}

fn focus(t: &TTerm) -> Result<Focus, Stuck> {
    match t {
        TTerm::Err(ty) => Ok(Focus::Abort(ty.clone())),
        TTerm::Hole => Err(stuck(t)),
        TTerm::Var(_) | TTerm::Unit | TTerm::Lam(..) => Ok(Focus::Value),
        TTerm::Roll(ty, b) => Ok(under(b, |b2| TTerm::roll(ty.clone(), b2))?.unwrap_or(Focus::Value)),
        TTerm::Inl(ty, b) => Ok(under(b, |b2| TTerm::inl(ty.clone(), b2))?.unwrap_or(Focus::Value)),
        TTerm::Inr(ty, b) => Ok(under(b, |b2| TTerm::inr(ty.clone(), b2))?.unwrap_or(Focus::Value)),
        TTerm::Pair(a, b) => {
            if let Some(f) = under(a, |a2| TTerm::pair(a2, (**b).clone()))? {
                return Ok(f);
            }
            Ok(under(b, |b2| TTerm::pair((**a).clone(), b2))?.unwrap_or(Focus::Value))
        }
        TTerm::Let(a, body) => {
            if let Some(f) = under(a, |a2| TTerm::let_in(a2, (**body).clone()))? {
                return Ok(f);
            }
            Ok(Focus::Reduced(body.instantiate(a), TRule::Let))
        }
        TTerm::Unroll(a) => {
            if let Some(f) = under(a, TTerm::unroll)? {
                return Ok(f);
            }
            match &**a {
                TTerm::Roll(_, v) => Ok(Focus::Reduced((**v).clone(), TRule::Unroll)),
                _ => Err(stuck(t)),
            }
        }
        TTerm::MatchPair(s, body) => {
            if let Some(f) = under(s, |s2| TTerm::match_pair(s2, (**body).clone()))? {
                return Ok(f);
            }
            match &**s {
                TTerm::Pair(v1, v2) => Ok(Focus::Reduced(body.instantiate2(v1, v2), TRule::MatchPair)),
                _ => Err(stuck(t)),
            }
        }
        TTerm::Case(s, l, r) => {
            if let Some(f) = under(s, |s2| TTerm::case(s2, (**l).clone(), (**r).clone()))? {
                return Ok(f);
            }
            match &**s {
                TTerm::Inl(_, v) => Ok(Focus::Reduced(l.instantiate(v), TRule::CaseInl)),
                TTerm::Inr(_, v) => Ok(Focus::Reduced(r.instantiate(v), TRule::CaseInr)),
                _ => Err(stuck(t)),
            }
        }
        TTerm::App(f, a) => {
            if let Some(r) = under(f, |f2| TTerm::app(f2, (**a).clone()))? {
                return Ok(r);
            }
            if let Some(r) = under(a, |a2| TTerm::app((**f).clone(), a2))? {
                return Ok(r);
            }
            match &**f {
                TTerm::Lam(_, body) => Ok(Focus::Reduced(body.instantiate(a), TRule::Beta)),
                _ => Err(stuck(t)),
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TTrace {
    pub steps: Vec<(TRule, TTerm)>,
    pub outcome: WeightedOutcome<TTerm>,
}

/// Runs `t` for at most `fuel` steps of any weight, accumulating the unroll weight.
pub fn eval_typed(t: &TTerm, fuel: u64) -> Result<WeightedOutcome<TTerm>, Stuck> {
    Ok(trace_typed(t, fuel, false)?.outcome)
}

pub fn trace_typed(t: &TTerm, fuel: u64, keep_terms: bool) -> Result<TTrace, Stuck> {
    let mut current = t.clone();
    let mut steps = Vec::new();
    let mut taken = 0;
    let mut unrolls = 0;
    let finish = |outcome, steps, taken, unrolls| {
        Ok(TTrace {
            steps,
            outcome: WeightedOutcome {
                outcome,
                unrolls,
                steps: taken,
            },
        })
    };
    loop {
        if current.is_err() {
            return finish(Outcome::TypeError, steps, taken, unrolls);
        }
        if current.is_value() {
            return finish(Outcome::Value(current), steps, taken, unrolls);
        }
        if taken == fuel {
            return finish(Outcome::FuelExhausted(current), steps, taken, unrolls);
        }
        match step_typed(&current)? {
            TStep::Terminal => return Err(stuck(&current)),
            TStep::Stepped(next, rule) => {
                taken += 1;
                unrolls += rule.weight();
                if keep_terms {
                    steps.push((rule, next.clone()));
                }
                current = next;
            }
        }
    }
}
