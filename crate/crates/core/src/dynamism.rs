//! Type dynamism as canonical proof terms, the ep pairs they denote, and
//! syntactic term dynamism.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::elaborate::{functor_fun, functor_prod, functor_sum, tag_inject, tag_project, translate_type, CastCtx};
use crate::gradual::{GEnv, GTerm, GType};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DerivNode {
    /// Only at `1` and `?`.
    Id,
    /// `tag(G) o rest`, where `rest : A <= G` and `A` is not `?`.
    Tag { tag: GType, rest: Box<Deriv> },
    Prod(Box<Deriv>, Box<Deriv>),
    Sum(Box<Deriv>, Box<Deriv>),
    Fun(Box<Deriv>, Box<Deriv>),
}

/// A canonical derivation of `lower <= upper`. Endpoints are cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Deriv {
    node: DerivNode,
    lower: GType,
    upper: GType,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivError {
    #[error("cannot compose {outer} after {inner}: endpoints {inner_upper} and {outer_lower} differ")]
    Endpoints {
        outer: String,
        inner: String,
        inner_upper: GType,
        outer_lower: GType,
    },
    #[error("ill-formed derivation: {0}")]
    IllFormed(String),
}

impl Deriv {
    pub fn node(&self) -> &DerivNode {
        &self.node
    }

    pub fn lower(&self) -> &GType {
        &self.lower
    }

    pub fn upper(&self) -> &GType {
        &self.upper
    }

    fn id_base(a: GType) -> Deriv {
        debug_assert!(matches!(a, GType::Dyn | GType::Unit));
        Deriv {
            node: DerivNode::Id,
            lower: a.clone(),
            upper: a,
        }
    }

    fn tag(tag: GType, rest: Deriv) -> Deriv {
        Deriv {
            lower: rest.lower.clone(),
            upper: GType::Dyn,
            node: DerivNode::Tag {
                tag,
                rest: Box::new(rest),
            },
        }
    }

    fn prod(c: Deriv, d: Deriv) -> Deriv {
        Deriv {
            lower: GType::prod(c.lower.clone(), d.lower.clone()),
            upper: GType::prod(c.upper.clone(), d.upper.clone()),
            node: DerivNode::Prod(Box::new(c), Box::new(d)),
        }
    }

    fn sum(c: Deriv, d: Deriv) -> Deriv {
        Deriv {
            lower: GType::sum(c.lower.clone(), d.lower.clone()),
            upper: GType::sum(c.upper.clone(), d.upper.clone()),
            node: DerivNode::Sum(Box::new(c), Box::new(d)),
        }
    }

    fn fun(c: Deriv, d: Deriv) -> Deriv {
        Deriv {
            lower: GType::fun(c.lower.clone(), d.lower.clone()),
            upper: GType::fun(c.upper.clone(), d.upper.clone()),
            node: DerivNode::Fun(Box::new(c), Box::new(d)),
        }
    }

    /// Re-derives the cached endpoints and the side conditions of every node.
    pub fn well_formed(&self) -> Result<(), DerivError> {
        let bad = |msg: String| Err(DerivError::IllFormed(msg));
        match &self.node {
            DerivNode::Id => {
                if self.lower != self.upper || !matches!(self.lower, GType::Dyn | GType::Unit) {
                    return bad(format!("id at {} <= {}", self.lower, self.upper));
                }
            }
            DerivNode::Tag { tag, rest } => {
                rest.well_formed()?;
                if !tag.is_tag() || rest.upper != *tag || rest.lower.is_dyn() {
                    return bad(format!("tag({tag}) after {rest}"));
                }
                if rest.lower.floor().ok().as_ref() != Some(tag) || self.lower != rest.lower || !self.upper.is_dyn() {
                    return bad(format!("tag({tag}) endpoints {} <= {}", self.lower, self.upper));
                }
            }
            DerivNode::Prod(c, d) | DerivNode::Sum(c, d) | DerivNode::Fun(c, d) => {
                c.well_formed()?;
                d.well_formed()?;
                let rebuilt = match &self.node {
                    DerivNode::Prod(..) => Deriv::prod((**c).clone(), (**d).clone()),
                    DerivNode::Sum(..) => Deriv::sum((**c).clone(), (**d).clone()),
                    _ => Deriv::fun((**c).clone(), (**d).clone()),
                };
                if rebuilt.lower != self.lower || rebuilt.upper != self.upper {
                    return bad(format!("congruence endpoints {} <= {}", self.lower, self.upper));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Deriv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            DerivNode::Id => write!(f, "id({})", self.lower),
            DerivNode::Tag { tag, rest } => write!(f, "tag({tag}) o {rest}"),
            DerivNode::Prod(c, d) => write!(f, "({c} x {d})"),
            DerivNode::Sum(c, d) => write!(f, "({c} + {d})"),
            DerivNode::Fun(c, d) => write!(f, "({c} -> {d})"),
        }
    }
}

/// The canonical derivation of `a <= b`, if one exists.
pub fn check_dynamism(a: &GType, b: &GType) -> Option<Deriv> {
    use GType::*;
    match (a, b) {
        (Dyn, Dyn) => Some(Deriv::id_base(Dyn)),
        (Unit, Unit) => Some(Deriv::id_base(Unit)),
        (a, Dyn) => {
            let g = a.floor().ok()?;
            Some(Deriv::tag(g.clone(), check_dynamism(a, &g)?))
        }
        (Prod(a1, b1), Prod(a2, b2)) => Some(Deriv::prod(check_dynamism(a1, a2)?, check_dynamism(b1, b2)?)),
        (Sum(a1, b1), Sum(a2, b2)) => Some(Deriv::sum(check_dynamism(a1, a2)?, check_dynamism(b1, b2)?)),
        (Fun(a1, b1), Fun(a2, b2)) => Some(Deriv::fun(check_dynamism(a1, a2)?, check_dynamism(b1, b2)?)),
        _ => None,
    }
}

pub fn is_less_dynamic(a: &GType, b: &GType) -> bool {
    check_dynamism(a, b).is_some()
}

/// Reflexivity: `id(A) : A <= A`, lifted through connectives.
pub fn deriv_id(a: &GType) -> Deriv {
    match a {
        GType::Dyn | GType::Unit => Deriv::id_base(a.clone()),
        GType::Prod(x, y) => Deriv::prod(deriv_id(x), deriv_id(y)),
        GType::Sum(x, y) => Deriv::sum(deriv_id(x), deriv_id(y)),
        GType::Fun(x, y) => Deriv::fun(deriv_id(x), deriv_id(y)),
    }
}

/// Transitivity: `c o d : A1 <= A3` for `d : A1 <= A2` and `c : A2 <= A3`,
/// by recursion on `c`.
pub fn deriv_compose(c: &Deriv, d: &Deriv) -> Result<Deriv, DerivError> {
    if c.lower != d.upper {
        return Err(DerivError::Endpoints {
            outer: c.to_string(),
            inner: d.to_string(),
            inner_upper: d.upper.clone(),
            outer_lower: c.lower.clone(),
        });
    }
    Ok(match (&c.node, &d.node) {
        (DerivNode::Tag { tag, rest }, _) => Deriv::tag(tag.clone(), deriv_compose(rest, d)?),
        (DerivNode::Id, _) => d.clone(),
        (DerivNode::Prod(c1, c2), DerivNode::Prod(d1, d2)) => {
            Deriv::prod(deriv_compose(c1, d1)?, deriv_compose(c2, d2)?)
        }
        (DerivNode::Sum(c1, c2), DerivNode::Sum(d1, d2)) => Deriv::sum(deriv_compose(c1, d1)?, deriv_compose(c2, d2)?),
        (DerivNode::Fun(c1, c2), DerivNode::Fun(d1, d2)) => Deriv::fun(deriv_compose(c1, d1)?, deriv_compose(c2, d2)?),
        _ => unreachable!("matching endpoints force matching congruences"),
    })
}

/// `top(A) : A <= ?`.
pub fn deriv_top(a: &GType) -> Deriv {
    match a {
        GType::Dyn => Deriv::id_base(GType::Dyn),
        GType::Unit => Deriv::tag(GType::Unit, Deriv::id_base(GType::Unit)),
        GType::Prod(x, y) => Deriv::tag(GType::dyn_prod(), Deriv::prod(deriv_top(x), deriv_top(y))),
        GType::Sum(x, y) => Deriv::tag(GType::dyn_sum(), Deriv::sum(deriv_top(x), deriv_top(y))),
        GType::Fun(x, y) => Deriv::tag(GType::dyn_fun(), Deriv::fun(deriv_top(x), deriv_top(y))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    /// Embedding, from the lower type to the upper.
    E,
    /// Projection, from the upper type to the lower.
    P,
}

impl Mode {
    pub fn complement(self) -> Mode {
        match self {
            Mode::E => Mode::P,
            Mode::P => Mode::E,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::E => "e",
            Mode::P => "p",
        })
    }
}

/// The embedding or projection denoted by `c`.
pub fn ep_cast(mode: Mode, c: &Deriv) -> CastCtx {
    match &c.node {
        DerivNode::Id => CastCtx::hole(translate_type(&c.lower)),
        DerivNode::Tag { tag, rest } => match mode {
            Mode::E => tag_inject(tag).compose(&ep_cast(Mode::E, rest)),
            Mode::P => ep_cast(Mode::P, rest).compose(&tag_project(tag)),
        },
        DerivNode::Prod(c1, c2) => functor_prod(&ep_cast(mode, c1), &ep_cast(mode, c2)),
        DerivNode::Sum(c1, c2) => functor_sum(&ep_cast(mode, c1), &ep_cast(mode, c2)),
        DerivNode::Fun(c1, c2) => functor_fun(&ep_cast(mode.complement(), c1), &ep_cast(mode, c2)),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermDynError {
    #[error("environments have different lengths {0} and {1}")]
    EnvLength(usize, usize),
    #[error("environment entry {index}: {left} is not less dynamic than {right}")]
    EnvEntry { index: usize, left: GType, right: GType },
    #[error("{left} is not less dynamic than {right} at `{term}`")]
    Unrelated { left: GType, right: GType, term: String },
    #[error("different term structure: `{left}` vs `{right}`")]
    Structure { left: String, right: String },
    #[error("ill-typed at `{term}`: {message}")]
    Typing { term: String, message: String },
    #[error("err has no term dynamism rule")]
    ErrTerm,
}

/// Pointwise dynamism of two environments of equal length.
pub fn check_env_dynamism(env1: &GEnv, env2: &GEnv) -> Result<(), TermDynError> {
    if env1.len() != env2.len() {
        return Err(TermDynError::EnvLength(env1.len(), env2.len()));
    }
    for ((index, a), (_, b)) in env1.indexed().zip(env2.indexed()) {
        if !is_less_dynamic(a, b) {
            return Err(TermDynError::EnvEntry {
                index,
                left: a.clone(),
                right: b.clone(),
            });
        }
    }
    Ok(())
}

/// Decides `env1 <= env2 |- t1 <= t2 : A1 <= A2` and returns `(A1, A2)`.
pub fn check_term_dynamism(env1: &GEnv, env2: &GEnv, t1: &GTerm, t2: &GTerm) -> Result<(GType, GType), TermDynError> {
    check_env_dynamism(env1, env2)?;
    let mut e1 = env1.clone();
    let mut e2 = env2.clone();
    let (a1, a2) = term_dyn(&mut e1, &mut e2, t1, t2)?;
    debug_assert!(is_less_dynamic(&a1, &a2));
    Ok((a1, a2))
}

fn structure(t1: &GTerm, t2: &GTerm) -> TermDynError {
    TermDynError::Structure {
        left: t1.to_string(),
        right: t2.to_string(),
    }
}

fn typing(t: &GTerm, message: String) -> TermDynError {
    TermDynError::Typing {
        term: t.to_string(),
        message,
    }
}

fn related(a: &GType, b: &GType, t: &GTerm) -> Result<(), TermDynError> {
    if is_less_dynamic(a, b) {
        Ok(())
    } else {
        Err(TermDynError::Unrelated {
            left: a.clone(),
            right: b.clone(),
            term: t.to_string(),
        })
    }
}

fn expect_ty(found: &GType, wanted: &GType, t: &GTerm) -> Result<(), TermDynError> {
    if found == wanted {
        Ok(())
    } else {
        Err(typing(t, format!("expected {wanted}, found {found}")))
    }
}

fn under<R>(
    e1: &mut GEnv,
    e2: &mut GEnv,
    binders: Vec<(GType, GType)>,
    f: impl FnOnce(&mut GEnv, &mut GEnv) -> R,
) -> R {
    let n = binders.len();
    for (a, b) in binders {
        e1.push(a);
        e2.push(b);
    }
    let r = f(e1, e2);
    for _ in 0..n {
        e1.pop();
        e2.pop();
    }
    r
}

fn term_dyn(e1: &mut GEnv, e2: &mut GEnv, t1: &GTerm, t2: &GTerm) -> Result<(GType, GType), TermDynError> {
    use GTerm::{App, Case, Cast, Inl, Inr, Lam, MatchPair, Pair, Unit, Var};
    match (t1, t2) {
        (GTerm::Err(_), _) | (_, GTerm::Err(_)) => Err(TermDynError::ErrTerm),
        (Var(i), Var(j)) if i == j => {
            let a = e1.lookup(*i).cloned().ok_or_else(|| typing(t1, "unbound variable".into()))?;
            let b = e2.lookup(*j).cloned().ok_or_else(|| typing(t2, "unbound variable".into()))?;
            Ok((a, b))
        }
        (Unit, Unit) => Ok((GType::Unit, GType::Unit)),
        (Cast(a1, b1, s1), Cast(a2, b2, s2)) => {
            let (x1, x2) = term_dyn(e1, e2, s1, s2)?;
            expect_ty(&x1, a1, t1)?;
            expect_ty(&x2, a2, t2)?;
            related(b1, b2, t1)?;
            Ok((b1.clone(), b2.clone()))
        }
        (Pair(a1, b1), Pair(a2, b2)) => {
            let (x1, x2) = term_dyn(e1, e2, a1, a2)?;
            let (y1, y2) = term_dyn(e1, e2, b1, b2)?;
            Ok((GType::prod(x1, y1), GType::prod(x2, y2)))
        }
        (MatchPair(s1, body1), MatchPair(s2, body2)) => match term_dyn(e1, e2, s1, s2)? {
            (GType::Prod(x1, y1), GType::Prod(x2, y2)) => {
                under(e1, e2, vec![(*x1, *x2), (*y1, *y2)], |e1, e2| term_dyn(e1, e2, body1, body2))
            }
            (other, _) => Err(typing(t1, format!("matched a non-product of type {other}"))),
        },
        (Inl(sum1, s1), Inl(sum2, s2)) | (Inr(sum1, s1), Inr(sum2, s2)) => {
            let (GType::Sum(l1, r1), GType::Sum(l2, r2)) = (sum1, sum2) else {
                return Err(typing(t1, "injection annotation is not a sum".into()));
            };
            let (x1, x2) = term_dyn(e1, e2, s1, s2)?;
            let left = matches!(t1, Inl(..));
            let ((own1, other1), (own2, other2)) = if left { ((l1, r1), (l2, r2)) } else { ((r1, l1), (r2, l2)) };
            expect_ty(&x1, own1, t1)?;
            expect_ty(&x2, own2, t2)?;
            related(other1, other2, t1)?;
            Ok((sum1.clone(), sum2.clone()))
        }
        (Case(s1, l1, r1), Case(s2, l2, r2)) => match term_dyn(e1, e2, s1, s2)? {
            (GType::Sum(x1, y1), GType::Sum(x2, y2)) => {
                let (b1, b2) = under(e1, e2, vec![(*x1, *x2)], |e1, e2| term_dyn(e1, e2, l1, l2))?;
                let (c1, c2) = under(e1, e2, vec![(*y1, *y2)], |e1, e2| term_dyn(e1, e2, r1, r2))?;
                expect_ty(&c1, &b1, t1)?;
                expect_ty(&c2, &b2, t2)?;
                Ok((b1, b2))
            }
            (other, _) => Err(typing(t1, format!("case on a non-sum of type {other}"))),
        },
        (Lam(a1, body1), Lam(a2, body2)) => {
            related(a1, a2, t1)?;
            let (b1, b2) = under(e1, e2, vec![(a1.clone(), a2.clone())], |e1, e2| term_dyn(e1, e2, body1, body2))?;
            Ok((GType::fun(a1.clone(), b1), GType::fun(a2.clone(), b2)))
        }
        (App(f1, x1), App(f2, x2)) => match term_dyn(e1, e2, f1, f2)? {
            (GType::Fun(d1, c1), GType::Fun(d2, c2)) => {
                let (a1, a2) = term_dyn(e1, e2, x1, x2)?;
                expect_ty(&a1, &d1, t1)?;
                expect_ty(&a2, &d2, t2)?;
                Ok((*c1, *c2))
            }
            (other, _) => Err(typing(t1, format!("applied a non-function of type {other}"))),
        },
        _ => Err(structure(t1, t2)),
    }
}
