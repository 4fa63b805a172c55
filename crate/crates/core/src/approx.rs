//! Observational comparison of closed typed programs under fuel.
//!
//! `t1` error-approximates `t2` when `t1` errors, or both run out of fuel,
//! or both produce related values. Values are compared structurally; at
//! function type both sides are applied to the same sampled arguments.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamism::Deriv;
use crate::elaborate::{translate_term, untranslate_type};
use crate::gradual::{typecheck_gradual, GEnv, GTerm};
use crate::outcome::{Outcome, Stuck};
use crate::propgen::{Gen, GenConfig};
use crate::typed::{eval_typed, parse_tterm, parse_ttype, typecheck_typed, TEnv, TTerm, TType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cause {
    /// Exactly one side ran out of fuel.
    Fuel,
    /// A nested function comparison ran out of sampling depth.
    Sampling,
}

/// Everything needed to reproduce a failing comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub left: String,
    pub right: String,
    pub ty: String,
    /// Arguments applied on the path to the failure, outermost first.
    pub arguments: Vec<String>,
    pub reason: String,
    pub seed: u64,
    pub fuel: u64,
    pub samples: usize,
    pub equiv: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails { witness: Box<Witness> },
    Inconclusive { cause: Cause },
}

impl Verdict {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails { witness } => Some(witness),
            _ => None,
        }
    }

    /// Fails dominates Inconclusive, which dominates Holds.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (f @ Verdict::Fails { .. }, _) | (_, f @ Verdict::Fails { .. }) => f,
            (i @ Verdict::Inconclusive { .. }, _) | (_, i @ Verdict::Inconclusive { .. }) => i,
            _ => Verdict::Holds,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails { .. } => "fails",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("holds"),
            Verdict::Fails { witness } => write!(f, "fails: {}", witness.reason),
            Verdict::Inconclusive { cause: Cause::Fuel } => f.write_str("inconclusive: fuel"),
            Verdict::Inconclusive { cause: Cause::Sampling } => f.write_str("inconclusive: sampling"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareConfig {
    /// Typed step budget per evaluation.
    pub fuel: u64,
    /// Arguments sampled per function comparison.
    pub samples: usize,
    pub seed: u64,
    /// Functions nested deeper than this are treated as related.
    pub max_arrow_depth: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            fuel: 32_000,
            samples: 8,
            seed: 0,
            max_arrow_depth: 3,
        }
    }
}

impl CompareConfig {
    pub fn from_gen(cfg: &GenConfig, seed: u64) -> CompareConfig {
        CompareConfig {
            fuel: cfg.typed_fuel(),
            samples: cfg.samples,
            seed,
            max_arrow_depth: 3,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("programs have different types {0} and {1}")]
    TypeMismatch(String, String),
    #[error("ill-typed program: {0}")]
    IllTyped(String),
    #[error("graduality pairs need closed terms")]
    Open,
    #[error("derivation proves {0} but the terms have types {1} and {2}")]
    DerivationMismatch(String, String, String),
    #[error(transparent)]
    Stuck(#[from] Stuck),
    #[error("witness: {0}")]
    Witness(String),
}

/// Verdict plus the total number of typed steps spent producing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub fuel_used: u64,
    pub samples: usize,
}

struct Comparator<'a> {
    cfg: &'a CompareConfig,
    rng: ChaCha8Rng,
    steps: u64,
}

/// A random closed typed value of type `ty`.
pub fn sample_value(ty: &TType, rng: &mut ChaCha8Rng) -> TTerm {
    match untranslate_type(ty) {
        Some(g) => {
            let cfg = GenConfig {
                max_type_depth: 3,
                err_probability: 0.0,
                ..GenConfig::default()
            };
            let seed = rng.gen::<u64>();
            translate_term(&Gen::new(&cfg, ChaCha8Rng::seed_from_u64(seed)).gen_value(&g))
        }
        None => generic_value(ty, rng, 4),
    }
}

fn generic_value(ty: &TType, rng: &mut ChaCha8Rng, budget: usize) -> TTerm {
    match ty {
        TType::Unit | TType::Var(_) => TTerm::Unit,
        TType::Prod(a, b) => TTerm::pair(generic_value(a, rng, budget), generic_value(b, rng, budget)),
        TType::Sum(a, b) => {
            if budget == 0 || rng.gen_bool(0.5) {
                TTerm::inl(ty.clone(), generic_value(a, rng, budget.saturating_sub(1)))
            } else {
                TTerm::inr(ty.clone(), generic_value(b, rng, budget - 1))
            }
        }
        TType::Fun(a, b) => TTerm::lam((**a).clone(), generic_value(b, rng, budget.saturating_sub(1))),
        TType::Mu(_) => {
            let unfolded = ty.unfold().expect("mu");
            TTerm::roll(ty.clone(), generic_value(&unfolded, rng, budget.saturating_sub(1)))
        }
    }
}

enum Rel {
    Holds,
    Fails(String, Vec<String>),
    Inconclusive(Cause),
}

impl Rel {
    fn and_then(self, next: impl FnOnce() -> Result<Rel, Stuck>) -> Result<Rel, Stuck> {
        match self {
            Rel::Holds => next(),
            Rel::Inconclusive(cause) => Ok(match next()? {
                f @ Rel::Fails(..) => f,
                _ => Rel::Inconclusive(cause),
            }),
            f => Ok(f),
        }
    }
}

impl Comparator<'_> {
    fn eval(&mut self, t: &TTerm) -> Result<Outcome<TTerm>, Stuck> {
        let r = eval_typed(t, self.cfg.fuel)?;
        self.steps += r.steps;
        Ok(r.outcome)
    }

    fn programs(&mut self, t1: &TTerm, t2: &TTerm, ty: &TType, depth: usize) -> Result<Rel, Stuck> {
        let o1 = self.eval(t1)?;
        if o1.is_error() {
            return Ok(Rel::Holds);
        }
        let o2 = self.eval(t2)?;
        Ok(match (o1, o2) {
            (Outcome::FuelExhausted(_), Outcome::FuelExhausted(_)) => Rel::Holds,
            (Outcome::FuelExhausted(_), _) | (_, Outcome::FuelExhausted(_)) => Rel::Inconclusive(Cause::Fuel),
            (Outcome::Value(_), Outcome::TypeError) => {
                Rel::Fails("left produced a value where right raised an error".into(), vec![])
            }
            (Outcome::Value(v1), Outcome::Value(v2)) => self.values(&v1, &v2, ty, depth)?,
            (Outcome::TypeError, _) => unreachable!("checked above"),
        })
    }

    fn values(&mut self, v1: &TTerm, v2: &TTerm, ty: &TType, depth: usize) -> Result<Rel, Stuck> {
        let differ = |what: &str| Ok(Rel::Fails(format!("{what}: `{v1}` vs `{v2}`"), vec![]));
        match (ty, v1, v2) {
            (TType::Unit, TTerm::Unit, TTerm::Unit) => Ok(Rel::Holds),
            (TType::Prod(a, b), TTerm::Pair(x1, y1), TTerm::Pair(x2, y2)) => {
                self.values(x1, x2, a, depth)?.and_then(|| self.values(y1, y2, b, depth))
            }
            (TType::Sum(a, _), TTerm::Inl(_, x1), TTerm::Inl(_, x2)) => self.values(x1, x2, a, depth),
            (TType::Sum(_, b), TTerm::Inr(_, x1), TTerm::Inr(_, x2)) => self.values(x1, x2, b, depth),
            (TType::Sum(..), _, _) => differ("different injections"),
            (TType::Mu(_), TTerm::Roll(_, x1), TTerm::Roll(_, x2)) => {
                let unfolded = ty.unfold().expect("mu");
                self.values(x1, x2, &unfolded, depth)
            }
            (TType::Fun(a, b), _, _) => {
                if depth >= self.cfg.max_arrow_depth {
                    return Ok(Rel::Holds);
                }
                let mut verdict = Rel::Holds;
                for _ in 0..self.cfg.samples {
                    let arg = sample_value(a, &mut self.rng);
                    let r = self.programs(
                        &TTerm::app(v1.clone(), arg.clone()),
                        &TTerm::app(v2.clone(), arg.clone()),
                        b,
                        depth + 1,
                    )?;
                    verdict = match (verdict, r) {
                        (_, Rel::Fails(reason, mut args)) => {
                            args.insert(0, arg.to_string());
                            return Ok(Rel::Fails(reason, args));
                        }
                        (Rel::Inconclusive(c), _) | (_, Rel::Inconclusive(c)) => Rel::Inconclusive(c),
                        _ => Rel::Holds,
                    };
                }
                Ok(verdict)
            }
            _ => differ("values of different shape"),
        }
    }
}

fn run(t1: &TTerm, t2: &TTerm, ty: &TType, cfg: &CompareConfig, equiv: bool) -> Result<Comparison, Stuck> {
    let mut c = Comparator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        steps: 0,
    };
    let mut rel = c.programs(t1, t2, ty, 0)?;
    if equiv {
        // The reverse direction reuses the same argument stream.
        c.rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rel = rel.and_then(|| c.programs(t2, t1, ty, 0))?;
    }
    let verdict = match rel {
        Rel::Holds => Verdict::Holds,
        Rel::Inconclusive(cause) => Verdict::Inconclusive { cause },
        Rel::Fails(reason, arguments) => Verdict::Fails {
            witness: Box::new(Witness {
                left: t1.to_string(),
                right: t2.to_string(),
                ty: ty.to_string(),
                arguments,
                reason,
                seed: cfg.seed,
                fuel: cfg.fuel,
                samples: cfg.samples,
                equiv,
            }),
        },
    };
    Ok(Comparison {
        verdict,
        fuel_used: c.steps,
        samples: cfg.samples,
    })
}

/// Does `t1` error-approximate `t2` at type `ty`?
pub fn compare_error_approx(t1: &TTerm, t2: &TTerm, ty: &TType, cfg: &CompareConfig) -> Result<Comparison, Stuck> {
    run(t1, t2, ty, cfg, false)
}

/// Error approximation in both directions.
pub fn compare_equiv(t1: &TTerm, t2: &TTerm, ty: &TType, cfg: &CompareConfig) -> Result<Comparison, Stuck> {
    run(t1, t2, ty, cfg, true)
}

/// Typechecks two closed programs and compares them at their common type.
pub fn compare_programs(t1: &TTerm, t2: &TTerm, cfg: &CompareConfig, equiv: bool) -> Result<Comparison, ApproxError> {
    let ty1 = typecheck_typed(&TEnv::new(), t1).map_err(|e| ApproxError::IllTyped(e.to_string()))?;
    let ty2 = typecheck_typed(&TEnv::new(), t2).map_err(|e| ApproxError::IllTyped(e.to_string()))?;
    if ty1 != ty2 {
        return Err(ApproxError::TypeMismatch(ty1.to_string(), ty2.to_string()));
    }
    Ok(run(t1, t2, &ty1, cfg, equiv)?)
}

/// Re-runs the comparison recorded in a witness.
pub fn replay_witness(w: &Witness) -> Result<Comparison, ApproxError> {
    let parse = |s: &str| parse_tterm(s).map_err(|e| ApproxError::Witness(e.to_string()));
    let t1 = parse(&w.left)?;
    let t2 = parse(&w.right)?;
    let ty = parse_ttype(&w.ty).map_err(|e| ApproxError::Witness(e.to_string()))?;
    let cfg = CompareConfig {
        fuel: w.fuel,
        samples: w.samples,
        seed: w.seed,
        max_arrow_depth: 3,
    };
    Ok(run(&t1, &t2, &ty, &cfg, w.equiv)?)
}

/// `(translate(<B1 => B2> t1), translate(t2))`, both at the translation of `B2`.
pub fn build_graduality_pair(t1: &GTerm, t2: &GTerm, c: &Deriv) -> Result<(TTerm, TTerm, TType), ApproxError> {
    if !t1.is_closed() || !t2.is_closed() {
        return Err(ApproxError::Open);
    }
    let b1 = typecheck_gradual(&GEnv::new(), t1).map_err(|e| ApproxError::IllTyped(e.to_string()))?;
    let b2 = typecheck_gradual(&GEnv::new(), t2).map_err(|e| ApproxError::IllTyped(e.to_string()))?;
    if (c.lower(), c.upper()) != (&b1, &b2) {
        return Err(ApproxError::DerivationMismatch(
            format!("{} <= {}", c.lower(), c.upper()),
            b1.to_string(),
            b2.to_string(),
        ));
    }
    let lhs = translate_term(&GTerm::cast(b1, b2.clone(), t1.clone()));
    Ok((lhs, translate_term(t2), crate::elaborate::translate_type(&b2)))
}
