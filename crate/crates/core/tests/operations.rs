//! Documented behaviour of the public operations, through the public API.

use lamg_core::approx::{build_graduality_pair, compare_equiv, compare_error_approx, CompareConfig, Verdict};
use lamg_core::dynamism::{
    check_dynamism, check_term_dynamism, deriv_compose, deriv_id, deriv_top, ep_cast, DerivNode, Mode,
};
use lamg_core::elaborate::{dyn_type, translate_term, translate_type};
use lamg_core::gradual::{eval_gradual, parse_term, parse_type, step_gradual, typecheck_gradual, GTerm, GType, Rule, Step};
use lamg_core::propgen::{Gen, GenConfig};
use lamg_core::typed::{eval_typed, parse_tterm, parse_ttype, typecheck_typed, TTerm, TType};
use lamg_core::{Env, Outcome};

fn g(src: &str) -> GTerm {
    parse_term(src).unwrap()
}

fn ty(src: &str) -> GType {
    parse_type(src).unwrap()
}

const OMEGA: &str = "(fun (x : ?) -> (<? => ? -> ?> x) x) (<? -> ? => ?> (fun (x : ?) -> (<? => ? -> ?> x) x))";

#[test]
fn floor_picks_the_tag() {
    assert_eq!(GType::Unit.floor().unwrap(), GType::Unit);
    assert_eq!(ty("1 * ?").floor().unwrap(), ty("? * ?"));
    assert!(GType::Dyn.floor().is_err());
}

#[test]
fn gradual_typing() {
    assert_eq!(typecheck_gradual(&Env::new(), &g("<1 => ?> ()")).unwrap(), GType::Dyn);
    assert_eq!(typecheck_gradual(&Env::new(), &g("fun (x : ?) -> x")).unwrap(), ty("? -> ?"));
    assert!(typecheck_gradual(&Env::new(), &g("() ()")).is_err());
}

#[test]
fn gradual_steps() {
    let v = g("<1 => ?> ()");
    assert_eq!(
        step_gradual(&GTerm::cast(GType::Dyn, GType::Dyn, v.clone())).unwrap(),
        Step::Stepped(v, Rule::DynDyn)
    );
    assert_eq!(eval_gradual(&g("<? => 1> <1 => ?> ()"), 100).unwrap(), Outcome::Value(GTerm::Unit));
    assert!(eval_gradual(&g(OMEGA), 1000).unwrap().is_exhausted());
    assert_eq!(eval_gradual(&GTerm::Err(GType::Unit), 0).unwrap(), Outcome::TypeError);
}

/// The unfolding of the dynamic type, written out by hand.
#[test]
fn tagged_unit_has_the_dynamic_type() {
    let unfolded = parse_ttype("1 + (? * ? + ((? + ?) + (? -> ?)))").unwrap();
    assert_eq!(dyn_type().unfold().unwrap(), unfolded);
    let t = TTerm::roll(dyn_type(), TTerm::inl(unfolded, TTerm::Unit));
    assert_eq!(typecheck_typed(&Env::new(), &t).unwrap(), dyn_type());
}

#[test]
fn typed_examples() {
    let nat = parse_ttype("mu a. 1 + a").unwrap();
    let t = parse_tterm("unroll roll [mu a. 1 + a] inl [1 + (mu a. 1 + a)] ()").unwrap();
    assert_eq!(typecheck_typed(&Env::new(), &t).unwrap(), nat.unfold().unwrap());
    assert!(typecheck_typed(&Env::new(), &parse_tterm("let x = () in x x").unwrap()).is_err());

    let w = eval_typed(&parse_tterm("unroll roll [mu a. 1] ()").unwrap(), 10).unwrap();
    assert_eq!((w.outcome, w.unrolls), (Outcome::Value(TTerm::Unit), 1));
    let w = eval_typed(&TTerm::Err(TType::Unit), 10).unwrap();
    assert_eq!((w.outcome, w.unrolls), (Outcome::TypeError, 0));
    let w = eval_typed(&translate_term(&g(OMEGA)), 1000).unwrap();
    assert!(w.outcome.is_exhausted() && w.unrolls >= 1);
}

#[test]
fn canonical_derivations() {
    let one_dyn = check_dynamism(&GType::Unit, &GType::Dyn).unwrap();
    let f = check_dynamism(&ty("1 -> 1"), &ty("? -> ?")).unwrap();
    assert_eq!(f.node(), &DerivNode::Fun(Box::new(one_dyn.clone()), Box::new(one_dyn.clone())));
    assert!(check_dynamism(&GType::Dyn, &GType::Unit).is_none());
    let p = check_dynamism(&ty("1 * 1"), &GType::Dyn).unwrap();
    assert_eq!(p, deriv_top(&ty("1 * 1")));
    match p.node() {
        DerivNode::Tag { tag, rest } => {
            assert_eq!(tag, &GType::dyn_prod());
            assert_eq!(rest.node(), &DerivNode::Prod(Box::new(one_dyn.clone()), Box::new(one_dyn)));
        }
        n => panic!("{n:?}"),
    }
}

#[test]
fn admissible_rules() {
    let d = deriv_top(&ty("1 -> ?"));
    assert_eq!(deriv_compose(&deriv_id(&GType::Dyn), &d).unwrap(), d);
    let c = check_dynamism(&ty("1 * ?"), &ty("? * ?")).unwrap();
    let c2 = check_dynamism(&ty("1 * 1"), &ty("1 * ?")).unwrap();
    assert_eq!(deriv_compose(&c, &c2).unwrap(), check_dynamism(&ty("1 * 1"), &ty("? * ?")).unwrap());
    assert!(deriv_compose(&c2, &c).is_err());
}

#[test]
fn ep_pair_rows() {
    let tag1 = deriv_top(&GType::Unit);
    let e = ep_cast(Mode::E, &tag1);
    assert_eq!(e.body, parse_tterm("roll [?] inl [1 + (? * ? + ((? + ?) + (? -> ?)))] []").unwrap());
    for m in [Mode::E, Mode::P] {
        assert_eq!(ep_cast(m, &deriv_id(&GType::Dyn)).body, TTerm::Hole);
        assert_eq!(ep_cast(m, &deriv_id(&GType::Unit)).body, TTerm::Hole);
    }
    // The projection of a function derivation embeds its argument.
    let f = check_dynamism(&ty("1 -> 1"), &ty("? -> ?")).unwrap();
    let p = ep_cast(Mode::P, &f);
    assert_eq!((p.source.clone(), p.target.clone()), (translate_type(&ty("? -> ?")), translate_type(&ty("1 -> 1"))));
    assert!(p.body.to_string().contains("roll [?] inl"));
}

#[test]
fn term_dynamism_rules() {
    let (a, b) = check_term_dynamism(&Env::new(), &Env::new(), &g("fun (x : 1) -> x"), &g("fun (x : ?) -> x")).unwrap();
    assert_eq!((a, b), (ty("1 -> 1"), ty("? -> ?")));
    let env1 = Env::from_outermost(vec![GType::Unit]);
    let env2 = Env::from_outermost(vec![GType::Dyn]);
    assert!(check_term_dynamism(&env1, &env2, &GTerm::Var(0), &GTerm::Var(0)).is_ok());
    assert!(check_term_dynamism(&env2, &env1, &GTerm::Var(0), &GTerm::Var(0)).is_err());
    let lo = GTerm::cast(GType::Unit, GType::Unit, GTerm::Var(0));
    let hi = GTerm::cast(GType::Dyn, GType::Dyn, GTerm::Var(0));
    assert!(check_term_dynamism(&env1, &env2, &lo, &hi).is_ok());
}

#[test]
fn comparisons() {
    let cfg = CompareConfig::default();
    let unit = TType::Unit;
    let err = TTerm::Err(TType::Unit);
    assert_eq!(compare_error_approx(&err, &TTerm::Unit, &unit, &cfg).unwrap().verdict, Verdict::Holds);
    assert_eq!(compare_error_approx(&TTerm::Unit, &TTerm::Unit, &unit, &cfg).unwrap().verdict, Verdict::Holds);
    assert!(compare_error_approx(&TTerm::Unit, &err, &unit, &cfg).unwrap().verdict.is_fails());
    assert!(compare_equiv(&err, &TTerm::Unit, &unit, &cfg).unwrap().verdict.is_fails());

    // A retraction round trip of a function is equivalent to the function.
    let f = translate_term(&g("fun (x : 1) -> x"));
    let c = check_dynamism(&ty("1 -> 1"), &ty("? -> ?")).unwrap();
    let round = ep_cast(Mode::P, &c).plug(&ep_cast(Mode::E, &c).plug(&f));
    let v = compare_equiv(&round, &f, &translate_type(&ty("1 -> 1")), &cfg).unwrap();
    assert_eq!(v.verdict, Verdict::Holds);
}

#[test]
fn graduality_pairs() {
    let cfg = CompareConfig::default();
    let t1 = g("fun (x : 1) -> x");
    let t2 = g("fun (x : ?) -> x");
    let c = check_dynamism(&ty("1 -> 1"), &ty("? -> ?")).unwrap();
    let (lhs, rhs, at) = build_graduality_pair(&t1, &t2, &c).unwrap();
    assert_eq!(at, translate_type(&ty("? -> ?")));
    assert!(!compare_error_approx(&lhs, &rhs, &at, &cfg).unwrap().verdict.is_fails());

    let id = deriv_id(&GType::Unit);
    let (lhs, rhs, at) = build_graduality_pair(&g("()"), &g("()"), &id).unwrap();
    assert_eq!(compare_equiv(&lhs, &rhs, &at, &cfg).unwrap().verdict, Verdict::Holds);

    let top = deriv_top(&GType::Unit);
    let (lhs, rhs, at) = build_graduality_pair(&GTerm::Err(GType::Unit), &g("<1 => ?> ()"), &top).unwrap();
    assert_eq!(compare_error_approx(&lhs, &rhs, &at, &cfg).unwrap().verdict, Verdict::Holds);
}

#[test]
fn generators() {
    let cfg = GenConfig::default();
    let mut gen = Gen::for_case(&cfg, "operations", 0);
    for _ in 0..200 {
        assert_eq!(gen.gen_related_type(&GType::Unit), GType::Unit);
    }
    let mut saw_fun = false;
    for _ in 0..200 {
        saw_fun |= matches!(gen.gen_related_type(&GType::Dyn), GType::Fun(..));
    }
    assert!(saw_fun);
    let mut small = Gen::for_case(
        &GenConfig {
            max_term_size: 1,
            err_probability: 0.0,
            ..cfg
        },
        "operations",
        1,
    );
    assert_eq!(small.gen_term(&Env::new(), &GType::Unit), GTerm::Unit);
}
