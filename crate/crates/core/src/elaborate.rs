//! Compilation of the cast calculus into the typed language.
//!
//! The dynamic type becomes a recursive right-nested sum over the four tags,
//! `mu a. 1 + (a * a + (a + a + (a -> a)))`, and every cast becomes an
//! evaluation context with one hole.

use serde::Serialize;

use crate::gradual::{GEnv, GTerm, GType};
use crate::typed::{check_typed, TEnv, TTerm, TType, TTypeError};

/// `mu a. 1 + (a * a + (a + a + (a -> a)))`
pub fn dyn_type() -> TType {
    let a = || TType::Var(0);
    TType::mu(TType::sum(
        TType::Unit,
        TType::sum(
            TType::prod(a(), a()),
            TType::sum(TType::sum(a(), a()), TType::fun(a(), a())),
        ),
    ))
}

pub fn translate_type(a: &GType) -> TType {
    match a {
        GType::Dyn => dyn_type(),
        GType::Unit => TType::Unit,
        GType::Prod(a, b) => TType::prod(translate_type(a), translate_type(b)),
        GType::Sum(a, b) => TType::sum(translate_type(a), translate_type(b)),
        GType::Fun(a, b) => TType::fun(translate_type(a), translate_type(b)),
    }
}

/// Inverse of [`translate_type`] on its image.
pub fn untranslate_type(t: &TType) -> Option<GType> {
    if *t == dyn_type() {
        return Some(GType::Dyn);
    }
    Some(match t {
        TType::Unit => GType::Unit,
        TType::Prod(a, b) => GType::prod(untranslate_type(a)?, untranslate_type(b)?),
        TType::Sum(a, b) => GType::sum(untranslate_type(a)?, untranslate_type(b)?),
        TType::Fun(a, b) => GType::fun(untranslate_type(a)?, untranslate_type(b)?),
        TType::Mu(_) | TType::Var(_) => return None,
    })
}

pub fn translate_env(env: &GEnv) -> TEnv {
    TEnv::from_outermost(env.iter().map(translate_type).collect())
}

/// A typed term with exactly one hole, mapping `source` to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CastCtx {
    pub body: TTerm,
    pub source: TType,
    pub target: TType,
}

impl CastCtx {
    pub fn hole(ty: TType) -> CastCtx {
        CastCtx {
            body: TTerm::Hole,
            source: ty.clone(),
            target: ty,
        }
    }

    pub fn plug(&self, t: &TTerm) -> TTerm {
        self.body.plug(t)
    }

    /// `self[inner[.]]`.
    pub fn compose(&self, inner: &CastCtx) -> CastCtx {
        debug_assert_eq!(inner.target, self.source, "composed contexts must meet");
        let ctx = CastCtx {
            body: self.body.plug(&inner.body),
            source: inner.source.clone(),
            target: self.target.clone(),
        };
        debug_assert!(ctx.body.hole_in_eval_position());
        ctx
    }

    /// Single hole in evaluation position, and `x : source |- body[x] : target`.
    pub fn well_formed(&self) -> Result<(), TTypeError> {
        if !self.body.hole_in_eval_position() {
            return Err(TTypeError::Hole);
        }
        let env = TEnv::from_outermost(vec![self.source.clone()]);
        check_typed(&env, &self.plug(&TTerm::Var(0)), &self.target)
    }
}

/// `match [.] with (x, y) -> (e1[x], e2[y])`
pub fn functor_prod(e1: &CastCtx, e2: &CastCtx) -> CastCtx {
    CastCtx {
        body: TTerm::match_pair(
            TTerm::Hole,
            TTerm::pair(e1.plug(&TTerm::Var(1)), e2.plug(&TTerm::Var(0))),
        ),
        source: TType::prod(e1.source.clone(), e2.source.clone()),
        target: TType::prod(e1.target.clone(), e2.target.clone()),
    }
}

/// `case [.] of inl x -> inl e1[x] | inr y -> inr e2[y]`
pub fn functor_sum(e1: &CastCtx, e2: &CastCtx) -> CastCtx {
    let target = TType::sum(e1.target.clone(), e2.target.clone());
    CastCtx {
        body: TTerm::case(
            TTerm::Hole,
            TTerm::inl(target.clone(), e1.plug(&TTerm::Var(0))),
            TTerm::inr(target.clone(), e2.plug(&TTerm::Var(0))),
        ),
        source: TType::sum(e1.source.clone(), e2.source.clone()),
        target,
    }
}

/// `let f = [.] in fun (a : dom.target) -> cod[f (dom[a])]`; `dom` runs contravariantly.
pub fn functor_fun(dom: &CastCtx, cod: &CastCtx) -> CastCtx {
    let call = TTerm::app(TTerm::Var(1), dom.plug(&TTerm::Var(0)));
    CastCtx {
        body: TTerm::let_in(TTerm::Hole, TTerm::lam(dom.source.clone(), cod.plug(&call))),
        source: TType::fun(dom.target.clone(), cod.source.clone()),
        target: TType::fun(dom.source.clone(), cod.target.clone()),
    }
}

/// Summand types of the unfolded dynamic type, in tag order.
fn summands() -> [TType; 4] {
    let d = dyn_type;
    [
        TType::Unit,
        TType::prod(d(), d()),
        TType::sum(d(), d()),
        TType::fun(d(), d()),
    ]
}

/// The nested sum type whose first summand is tag `from`.
fn sum_from(from: usize) -> TType {
    let s = summands();
    if from == 3 {
        return s[3].clone();
    }
    TType::sum(s[from].clone(), sum_from(from + 1))
}

/// Injects `t : summand(index)` into the unfolding of the dynamic type.
fn inject_index(index: usize, t: TTerm) -> TTerm {
    let mut term = if index == 3 { t } else { TTerm::inl(sum_from(index), t) };
    for level in (0..index).rev() {
        term = TTerm::inr(sum_from(level), term);
    }
    term
}

fn tag_of(g: &GType) -> usize {
    g.tag_index().unwrap_or_else(|| panic!("{g} is not a tag type"))
}

/// `roll ? (inj_G [.])`
pub fn tag_inject(g: &GType) -> CastCtx {
    CastCtx {
        body: TTerm::roll(dyn_type(), inject_index(tag_of(g), TTerm::Hole)),
        source: translate_type(g),
        target: dyn_type(),
    }
}

/// `case unroll [.] of inj_G x -> x | else -> err`, desugared to nested binary cases.
pub fn tag_project(g: &GType) -> CastCtx {
    let index = tag_of(g);
    let target = translate_type(g);
    // Built from the innermost case outwards; each level binds one variable.
    let mut body = if index == 3 {
        TTerm::Var(0)
    } else {
        TTerm::Err(target.clone())
    };
    for level in (0..3).rev() {
        let left = if level == index {
            TTerm::Var(0)
        } else {
            TTerm::Err(target.clone())
        };
        let right = if level < index { body } else { TTerm::Err(target.clone()) };
        body = TTerm::case(TTerm::Var(0), left, right);
    }
    // The outermost case scrutinizes the unrolled hole rather than a variable.
    let TTerm::Case(_, l, r) = body else { unreachable!() };
    CastCtx {
        body: TTerm::Case(Box::new(TTerm::unroll(TTerm::Hole)), l, r),
        source: dyn_type(),
        target,
    }
}

/// `E<A => B>`, total on all pairs of gradual types.
pub fn cast_ctx(a: &GType, b: &GType) -> CastCtx {
    use GType::*;
    match (a, b) {
        (Dyn, Dyn) => CastCtx::hole(dyn_type()),
        (a, Dyn) if a.is_tag() => tag_inject(a),
        (a, Dyn) => {
            let g = a.floor().expect("non-dynamic");
            tag_inject(&g).compose(&cast_ctx(a, &g))
        }
        (Dyn, b) if b.is_tag() => tag_project(b),
        (Dyn, b) => {
            let g = b.floor().expect("non-dynamic");
            cast_ctx(&g, b).compose(&tag_project(&g))
        }
        (a, b) if a.floor() != b.floor() => CastCtx {
            body: TTerm::let_in(TTerm::Hole, TTerm::Err(translate_type(b))),
            source: translate_type(a),
            target: translate_type(b),
        },
        (Unit, Unit) => CastCtx::hole(TType::Unit),
        (Prod(a1, b1), Prod(a2, b2)) => functor_prod(&cast_ctx(a1, a2), &cast_ctx(b1, b2)),
        (Sum(a1, b1), Sum(a2, b2)) => functor_sum(&cast_ctx(a1, a2), &cast_ctx(b1, b2)),
        (Fun(a1, b1), Fun(a2, b2)) => functor_fun(&cast_ctx(a2, a1), &cast_ctx(b1, b2)),
        _ => unreachable!("equal floors imply equal connectives"),
    }
}

/// Homomorphic on everything but casts, which become [`cast_ctx`] contexts.
pub fn translate_term(t: &GTerm) -> TTerm {
    match t {
        GTerm::Err(ty) => TTerm::Err(translate_type(ty)),
        GTerm::Var(i) => TTerm::Var(*i),
        GTerm::Cast(a, b, body) => cast_ctx(a, b).plug(&translate_term(body)),
        GTerm::Unit => TTerm::Unit,
        GTerm::Pair(a, b) => TTerm::pair(translate_term(a), translate_term(b)),
        GTerm::MatchPair(s, body) => TTerm::match_pair(translate_term(s), translate_term(body)),
        GTerm::Inl(ty, body) => TTerm::inl(translate_type(ty), translate_term(body)),
        GTerm::Inr(ty, body) => TTerm::inr(translate_type(ty), translate_term(body)),
        GTerm::Case(s, l, r) => TTerm::case(translate_term(s), translate_term(l), translate_term(r)),
        GTerm::Lam(ty, body) => TTerm::lam(translate_type(ty), translate_term(body)),
        GTerm::App(f, a) => TTerm::app(translate_term(f), translate_term(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradual::{parse_term, typecheck_gradual};
    use crate::outcome::Outcome;
    use crate::typed::{eval_typed, parse_tterm, typecheck_typed};

    fn all_types(depth: usize) -> Vec<GType> {
        let mut out = vec![GType::Dyn, GType::Unit];
        if depth > 1 {
            let smaller = all_types(depth - 1);
            for a in &smaller {
                for b in &smaller {
                    out.push(GType::prod(a.clone(), b.clone()));
                    out.push(GType::sum(a.clone(), b.clone()));
                    out.push(GType::fun(a.clone(), b.clone()));
                }
            }
        }
        out
    }

    #[test]
    fn dynamic_type_shape() {
        assert_eq!(
            dyn_type(),
            TType::mu(TType::sum(
                TType::Unit,
                TType::sum(
                    TType::prod(TType::Var(0), TType::Var(0)),
                    TType::sum(
                        TType::sum(TType::Var(0), TType::Var(0)),
                        TType::fun(TType::Var(0), TType::Var(0))
                    )
                )
            ))
        );
        assert_eq!(translate_type(&GType::fun(GType::Dyn, GType::Unit)), TType::fun(dyn_type(), TType::Unit));
    }

    #[test]
    fn sum_from_zero_is_the_unfolding() {
        assert_eq!(Some(sum_from(0)), dyn_type().unfold());
    }

    #[test]
    fn every_cast_context_is_well_formed() {
        let types = all_types(2);
        for a in &types {
            for b in &types {
                let ctx = cast_ctx(a, b);
                assert_eq!(ctx.source, translate_type(a));
                assert_eq!(ctx.target, translate_type(b));
                ctx.well_formed().unwrap_or_else(|e| panic!("<{a} => {b}>: {e}"));
            }
        }
    }

    #[test]
    fn fixed_rows() {
        assert_eq!(cast_ctx(&GType::Dyn, &GType::Dyn).body, TTerm::Hole);
        assert_eq!(
            cast_ctx(&GType::Unit, &GType::dyn_prod()).body,
            TTerm::let_in(TTerm::Hole, TTerm::Err(translate_type(&GType::dyn_prod())))
        );
        assert_eq!(
            cast_ctx(&GType::Unit, &GType::Dyn).body,
            parse_tterm("roll [?] inl [1 + (? * ? + ((? + ?) + (? -> ?)))] []").unwrap()
        );
    }

    #[test]
    fn projection_checks_each_tag() {
        for (i, g) in GType::tags().iter().enumerate() {
            for (j, h) in GType::tags().iter().enumerate() {
                let v = translate_term(&crate::propgen::canonical_value(h));
                let tagged = tag_inject(h).plug(&v);
                let r = eval_typed(&tag_project(g).plug(&tagged), 100).unwrap();
                if i == j {
                    assert_eq!(r.outcome, Outcome::Value(v.clone()));
                    assert_eq!(r.unrolls, 1);
                } else {
                    assert_eq!(r.outcome, Outcome::TypeError);
                }
            }
        }
    }

    #[test]
    fn function_functor_flips_domain() {
        let ctx = functor_fun(&cast_ctx(&GType::Dyn, &GType::Unit), &cast_ctx(&GType::Unit, &GType::Dyn));
        assert_eq!(ctx.source, TType::fun(TType::Unit, TType::Unit));
        assert_eq!(ctx.target, TType::fun(dyn_type(), dyn_type()));
        ctx.well_formed().unwrap();
    }

    #[test]
    fn tag_match_program_translates_and_runs() {
        let t = parse_term("<? => 1> <1 => ?> ()").unwrap();
        let tt = translate_term(&t);
        assert_eq!(typecheck_typed(&TEnv::new(), &tt), Ok(TType::Unit));
        assert_eq!(eval_typed(&tt, 100).unwrap().outcome, Outcome::Value(TTerm::Unit));
    }

    #[test]
    fn translation_preserves_types_of_open_terms() {
        let t = parse_term("fun (f : ?) -> <? => ? -> ?> f (<1 * 1 => ?> ((), ()))").unwrap();
        let ty = typecheck_gradual(&GEnv::new(), &t).unwrap();
        assert_eq!(typecheck_typed(&TEnv::new(), &translate_term(&t)), Ok(translate_type(&ty)));
    }

    #[test]
    fn untranslate_inverts() {
        for a in all_types(2) {
            assert_eq!(untranslate_type(&translate_type(&a)), Some(a));
        }
        assert_eq!(untranslate_type(&TType::mu(TType::Var(0))), None);
    }
}
