//! Call-by-value small-step semantics of the cast calculus.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GTerm, GType};
use crate::outcome::{Outcome, Stuck};

/// The reduction rule that justified a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    Beta,
    MatchPair,
    CaseInl,
    CaseInr,
    ErrProp,
    DynDyn,
    TagUp,
    TagDn,
    TagMatch,
    TagMismatch,
    TagMismatchPrime,
    Pair,
    Sum,
    SumPrime,
    Fun,
    /// `<1 => 1> v -> v`, needed for the cast case split to be total.
    UnitUnit,
}

impl Rule {
    pub const ALL: [Rule; 16] = [
        Rule::Beta,
        Rule::MatchPair,
        Rule::CaseInl,
        Rule::CaseInr,
        Rule::ErrProp,
        Rule::DynDyn,
        Rule::TagUp,
        Rule::TagDn,
        Rule::TagMatch,
        Rule::TagMismatch,
        Rule::TagMismatchPrime,
        Rule::Pair,
        Rule::Sum,
        Rule::SumPrime,
        Rule::Fun,
        Rule::UnitUnit,
    ];

    /// The cast rules of the calculus.
    pub const CAST_RULES: [Rule; 10] = [
        Rule::DynDyn,
        Rule::TagUp,
        Rule::TagDn,
        Rule::TagMatch,
        Rule::TagMismatch,
        Rule::TagMismatchPrime,
        Rule::Pair,
        Rule::Sum,
        Rule::SumPrime,
        Rule::Fun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Beta => "Beta",
            Rule::MatchPair => "MatchPair",
            Rule::CaseInl => "CaseInl",
            Rule::CaseInr => "CaseInr",
            Rule::ErrProp => "ErrProp",
            Rule::DynDyn => "DynDyn",
            Rule::TagUp => "TagUp",
            Rule::TagDn => "TagDn",
            Rule::TagMatch => "TagMatch",
            Rule::TagMismatch => "TagMismatch",
            Rule::TagMismatchPrime => "TagMismatch'",
            Rule::Pair => "Pair",
            Rule::Sum => "Sum",
            Rule::SumPrime => "Sum'",
            Rule::Fun => "Fun",
            Rule::UnitUnit => "UnitUnit",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Stepped(GTerm, Rule),
    /// The term is a value or `err`.
    Terminal,
}

enum Focus {
    Value,
    /// The whole program aborts to `err` at the given type.
    Abort(Rule, GType),
    Reduced(GTerm, Rule),
}

fn stuck(t: &GTerm) -> Stuck {
    Stuck(t.to_string())
}

/// Performs one reduction of a closed term.
pub fn step_gradual(t: &GTerm) -> Result<Step, Stuck> {
    if t.is_err() {
        return Ok(Step::Terminal);
    }
    Ok(match focus(t)? {
        Focus::Value => Step::Terminal,
        Focus::Abort(rule, ty) => Step::Stepped(GTerm::Err(ty), rule),
        Focus::Reduced(t2, rule) => Step::Stepped(t2, rule),
    })
}

/// Steps the first non-value subterm in evaluation order, rebuilding with `wrap`.
/// Returns `None` when the subterm is already a value.
fn under(sub: &GTerm, wrap: impl FnOnce(GTerm) -> GTerm) -> Result<Option<Focus>, Stuck> {
    Ok(match focus(sub)? {
        Focus::Value => None,
        Focus::Abort(rule, ty) => Some(Focus::Abort(rule, ty)),
        Focus::Reduced(s, rule) => Some(Focus::Reduced(wrap(s), rule)),
    })
}

fn focus(t: &GTerm) -> Result<Focus, Stuck> {
    match t {
        GTerm::Err(ty) => Ok(Focus::Abort(Rule::ErrProp, ty.clone())),
        GTerm::Var(_) => Err(stuck(t)),
        GTerm::Unit | GTerm::Lam(..) => Ok(Focus::Value),
        GTerm::Pair(a, b) => {
            if let Some(f) = under(a, |a2| GTerm::pair(a2, (**b).clone()))? {
                return Ok(f);
            }
            if let Some(f) = under(b, |b2| GTerm::pair((**a).clone(), b2))? {
                return Ok(f);
            }
            Ok(Focus::Value)
        }
        GTerm::Inl(ty, body) => Ok(under(body, |b| GTerm::inl(ty.clone(), b))?.unwrap_or(Focus::Value)),
        GTerm::Inr(ty, body) => Ok(under(body, |b| GTerm::inr(ty.clone(), b))?.unwrap_or(Focus::Value)),
        GTerm::MatchPair(s, body) => {
            if let Some(f) = under(s, |s2| GTerm::match_pair(s2, (**body).clone()))? {
                return Ok(f);
            }
            match &**s {
                GTerm::Pair(v1, v2) => Ok(Focus::Reduced(body.instantiate2(v1, v2), Rule::MatchPair)),
                _ => Err(stuck(t)),
            }
        }
        GTerm::Case(s, l, r) => {
            if let Some(f) = under(s, |s2| GTerm::case(s2, (**l).clone(), (**r).clone()))? {
                return Ok(f);
            }
            match &**s {
                GTerm::Inl(_, v) => Ok(Focus::Reduced(l.instantiate(v), Rule::CaseInl)),
                GTerm::Inr(_, v) => Ok(Focus::Reduced(r.instantiate(v), Rule::CaseInr)),
                _ => Err(stuck(t)),
            }
        }
        GTerm::App(f, a) => {
            if let Some(r) = under(f, |f2| GTerm::app(f2, (**a).clone()))? {
                return Ok(r);
            }
            if let Some(r) = under(a, |a2| GTerm::app((**f).clone(), a2))? {
                return Ok(r);
            }
            match &**f {
                GTerm::Lam(_, body) => Ok(Focus::Reduced(body.instantiate(a), Rule::Beta)),
                _ => Err(stuck(t)),
            }
        }
        GTerm::Cast(from, to, body) => {
            if let Some(f) = under(body, |b| GTerm::cast(from.clone(), to.clone(), b))? {
                return Ok(f);
            }
            cast_redex(t, from, to, body)
        }
    }
}

/// Reduces `<from => to> v` for a value `v`.
fn cast_redex(t: &GTerm, from: &GType, to: &GType, v: &GTerm) -> Result<Focus, Stuck> {
    use GType::*;
    let reduced = |t: GTerm, rule| Ok(Focus::Reduced(t, rule));
    match (from, to) {
        (Dyn, Dyn) => reduced(v.clone(), Rule::DynDyn),
        (a, Dyn) => {
            if a.is_tag() {
                return Ok(Focus::Value);
            }
            let g = a.floor().expect("non-dynamic");
            reduced(
                GTerm::cast(g.clone(), Dyn, GTerm::cast(a.clone(), g, v.clone())),
                Rule::TagUp,
            )
        }
        (Dyn, b) => {
            if b.is_tag() {
                match v {
                    GTerm::Cast(g2, Dyn, inner) if g2.is_tag() => {
                        if g2 == b {
                            reduced((**inner).clone(), Rule::TagMatch)
                        } else {
                            Ok(Focus::Abort(Rule::TagMismatch, b.clone()))
                        }
                    }
                    _ => Err(stuck(t)),
                }
            } else {
                let g = b.floor().expect("non-dynamic");
                reduced(
                    GTerm::cast(g.clone(), b.clone(), GTerm::cast(Dyn, g, v.clone())),
                    Rule::TagDn,
                )
            }
        }
        (a, b) if a.floor() != b.floor() => Ok(Focus::Abort(Rule::TagMismatchPrime, b.clone())),
        (Unit, Unit) => reduced(v.clone(), Rule::UnitUnit),
        (Prod(a1, b1), Prod(a2, b2)) => match v {
            GTerm::Pair(v1, v2) => reduced(
                GTerm::pair(
                    GTerm::cast((**a1).clone(), (**a2).clone(), (**v1).clone()),
                    GTerm::cast((**b1).clone(), (**b2).clone(), (**v2).clone()),
                ),
                Rule::Pair,
            ),
            _ => Err(stuck(t)),
        },
        (Sum(a1, b1), Sum(a2, b2)) => match v {
            GTerm::Inl(_, inner) => reduced(
                GTerm::inl(to.clone(), GTerm::cast((**a1).clone(), (**a2).clone(), (**inner).clone())),
                Rule::Sum,
            ),
            GTerm::Inr(_, inner) => reduced(
                GTerm::inr(to.clone(), GTerm::cast((**b1).clone(), (**b2).clone(), (**inner).clone())),
                Rule::SumPrime,
            ),
            _ => Err(stuck(t)),
        },
        (Fun(a1, b1), Fun(a2, b2)) => {
            // fun (x : A2) -> <B1 => B2> (v (<A2 => A1> x))
            let arg = GTerm::cast((**a2).clone(), (**a1).clone(), GTerm::Var(0));
            let call = GTerm::app(v.shift(1, 0), arg);
            reduced(
                GTerm::lam((**a2).clone(), GTerm::cast((**b1).clone(), (**b2).clone(), call)),
                Rule::Fun,
            )
        }
        _ => Err(stuck(t)),
    }
}

/// Runs `t` for at most `fuel` steps.
pub fn eval_gradual(t: &GTerm, fuel: u64) -> Result<Outcome<GTerm>, Stuck> {
    Ok(trace_gradual(t, fuel, false)?.outcome)
}

/// A recorded evaluation: each step's rule and resulting term.
#[derive(Clone, Debug)]
pub struct Trace {
    pub steps: Vec<(Rule, GTerm)>,
    pub outcome: Outcome<GTerm>,
    pub step_count: u64,
}

/// Evaluates like [`eval_gradual`], optionally keeping every intermediate term.
pub fn trace_gradual(t: &GTerm, fuel: u64, keep_terms: bool) -> Result<Trace, Stuck> {
    let mut current = t.clone();
    let mut steps = Vec::new();
    let mut taken = 0;
    loop {
        if current.is_err() {
            return Ok(Trace {
                steps,
                outcome: Outcome::TypeError,
                step_count: taken,
            });
        }
        if current.is_value() {
            return Ok(Trace {
                steps,
                outcome: Outcome::Value(current),
                step_count: taken,
            });
        }
        if taken == fuel {
            return Ok(Trace {
                steps,
                outcome: Outcome::FuelExhausted(current),
                step_count: taken,
            });
        }
        match step_gradual(&current)? {
            Step::Terminal => return Err(stuck(&current)),
            Step::Stepped(next, rule) => {
                taken += 1;
                if keep_terms {
                    steps.push((rule, next.clone()));
                }
                current = next;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradual::parse_term;

    fn p(src: &str) -> GTerm {
        parse_term(src).unwrap()
    }

    fn rules(src: &str) -> Vec<Rule> {
        trace_gradual(&p(src), 100, true)
            .unwrap()
            .steps
            .into_iter()
            .map(|(r, _)| r)
            .collect()
    }

    #[test]
    fn dyn_dyn_is_identity() {
        let v = p("<1 => ?> ()");
        let t = GTerm::cast(GType::Dyn, GType::Dyn, v.clone());
        assert_eq!(step_gradual(&t), Ok(Step::Stepped(v, Rule::DynDyn)));
    }

    #[test]
    fn pair_cast_distributes() {
        let t = p("<1 * 1 => ? * ?> ((), ())");
        assert_eq!(
            step_gradual(&t),
            Ok(Step::Stepped(p("(<1 => ?> (), <1 => ?> ())"), Rule::Pair))
        );
    }

    #[test]
    fn projection_at_wrong_tag_errors() {
        let t = p("<? => 1> <? -> ? => ?> (fun (x : ?) -> x)");
        assert_eq!(rules("<? => 1> <? -> ? => ?> (fun (x : ?) -> x)"), vec![Rule::TagMismatch]);
        assert_eq!(eval_gradual(&t, 100), Ok(Outcome::TypeError));
    }

    #[test]
    fn tag_dn_then_mismatch() {
        // casting a tagged function down to 1 * 1 goes through the product tag first
        assert_eq!(
            rules("<? => 1 * 1> <? -> ? => ?> (fun (x : ?) -> x)"),
            vec![Rule::TagDn, Rule::TagMismatch]
        );
    }

    #[test]
    fn tag_match_returns_payload() {
        let t = p("<? => 1> <1 => ?> ()");
        assert_eq!(eval_gradual(&t, 100), Ok(Outcome::Value(GTerm::Unit)));
    }

    #[test]
    fn err_is_terminal() {
        let e = GTerm::Err(GType::Unit);
        assert_eq!(step_gradual(&e), Ok(Step::Terminal));
        assert_eq!(eval_gradual(&e, 0), Ok(Outcome::TypeError));
    }

    #[test]
    fn values_are_terminal() {
        for src in ["()", "<1 => ?> ()", "fun (x : 1) -> x", "(inl [1 + ?] (), ())"] {
            assert_eq!(step_gradual(&p(src)), Ok(Step::Terminal), "{src}");
        }
    }

    #[test]
    fn omega_runs_out_of_fuel() {
        let d = "(fun (x : ?) -> (<? => ? -> ?> x) x)";
        let omega = format!("{d} (<? -> ? => ?> {d})");
        let out = eval_gradual(&p(&omega), 1000).unwrap();
        assert!(out.is_exhausted());
        // the loop body repeats: Fun-free cycle Beta, TagMatch, Beta, ...
        let r = rules(&omega);
        assert_eq!(&r[..5], &[Rule::Beta, Rule::TagMatch, Rule::Beta, Rule::TagMatch, Rule::Beta]);
    }

    #[test]
    fn function_cast_flips_domain() {
        let t = p("<1 -> 1 => ? -> ?> (fun (x : 1) -> x)");
        let Ok(Step::Stepped(wrapped, Rule::Fun)) = step_gradual(&t) else {
            panic!("expected Fun step");
        };
        assert_eq!(
            wrapped,
            p("fun (a : ?) -> <1 => ?> ((fun (x : 1) -> x) (<? => 1> a))")
        );
    }

    #[test]
    fn exact_fuel_reaches_value() {
        let t = p("<? => 1> <1 => ?> ()");
        assert_eq!(eval_gradual(&t, 1), Ok(Outcome::Value(GTerm::Unit)));
        assert!(eval_gradual(&t, 0).unwrap().is_exhausted());
    }
}
