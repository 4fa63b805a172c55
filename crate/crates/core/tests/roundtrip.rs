use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lamg_core::approx::{compare_error_approx, CompareConfig, Verdict};
use lamg_core::dynamism::{check_dynamism, check_term_dynamism, ep_cast, Mode};
use lamg_core::elaborate::{translate_term, translate_type};
use lamg_core::gradual::{parse_term, parse_type, typecheck_gradual, GType};
use lamg_core::propgen::{Gen, GenConfig};
use lamg_core::typed::{parse_tterm, parse_ttype, typecheck_typed};
use lamg_core::Env;

fn gen(seed: u64) -> Gen {
    Gen::new(&GenConfig::default(), ChaCha8Rng::seed_from_u64(seed))
}

/// Re-spaces every token boundary the printer emitted.
fn respace(s: &str) -> String {
    s.replace(' ', "  \n ")
}

fn cmp_cfg(seed: u64, fuel: u64) -> CompareConfig {
    CompareConfig {
        fuel,
        seed,
        ..CompareConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradual_print_parse(seed in any::<u64>()) {
        let (t, ty) = gen(seed).gen_program();
        prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t.clone());
        prop_assert_eq!(parse_term(&respace(&t.to_string())).unwrap(), t);
        prop_assert_eq!(parse_type(&ty.to_string()).unwrap(), ty);
    }

    #[test]
    fn typed_print_parse(seed in any::<u64>()) {
        let (t, ty) = gen(seed).gen_program();
        let tt = translate_term(&t);
        prop_assert_eq!(parse_tterm(&tt.to_string()).unwrap(), tt.clone());
        prop_assert_eq!(parse_tterm(&respace(&tt.to_string())).unwrap(), tt);
        let tty = translate_type(&ty);
        prop_assert_eq!(parse_ttype(&tty.to_string()).unwrap(), tty);
    }

    #[test]
    fn translation_preserves_types(seed in any::<u64>()) {
        let (t, ty) = gen(seed).gen_program();
        prop_assert_eq!(typecheck_typed(&Env::new(), &translate_term(&t)).unwrap(), translate_type(&ty));
    }

    #[test]
    fn mutation_pairs_are_related(seed in any::<u64>()) {
        let mut g = gen(seed);
        let (t2, _) = g.gen_program();
        if let Some((t1, t2)) = g.mutate_less_dynamic(&t2) {
            let (b1, b2) = check_term_dynamism(&Env::new(), &Env::new(), &t1, &t2).unwrap();
            prop_assert_eq!(typecheck_gradual(&Env::new(), &t1).unwrap(), b1.clone());
            prop_assert!(check_dynamism(&b1, &b2).is_some());
        }
    }

    #[test]
    fn approximation_is_reflexive(seed in any::<u64>()) {
        let (t, ty) = gen(seed).gen_program();
        let tt = translate_term(&t);
        let v = compare_error_approx(&tt, &tt, &translate_type(&ty), &cmp_cfg(seed, 20_000)).unwrap();
        prop_assert!(!v.verdict.is_fails(), "{}", v.verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    /// Along a chain of projection round trips, each link holding implies the composite holds.
    #[test]
    fn approximation_is_transitive_on_chains(seed in any::<u64>()) {
        let mut g = gen(seed);
        let b = g.gen_type();
        let a = g.gen_related_type(&b);
        let c = check_dynamism(&a, &b).unwrap();
        let round = |t| ep_cast(Mode::E, &c).plug(&ep_cast(Mode::P, &c).plug(t));
        let x3 = translate_term(&g.gen_value(&b));
        let x2 = round(&x3);
        let x1 = round(&x2);
        let ty = translate_type(&b);
        let cfg = cmp_cfg(seed, 20_000);
        let h12 = compare_error_approx(&x1, &x2, &ty, &cfg).unwrap().verdict;
        let h23 = compare_error_approx(&x2, &x3, &ty, &cfg).unwrap().verdict;
        if h12.is_holds() && h23.is_holds() {
            prop_assert_eq!(compare_error_approx(&x1, &x3, &ty, &cfg).unwrap().verdict, Verdict::Holds);
        }
    }

    /// More fuel never turns a failure into agreement.
    #[test]
    fn failures_survive_more_fuel(seed in any::<u64>()) {
        let mut g = gen(seed);
        let ty = g.gen_type();
        let t1 = translate_term(&g.gen_term(&Env::new(), &ty));
        let t2 = translate_term(&g.gen_term(&Env::new(), &ty));
        let tty = translate_type(&ty);
        let low = compare_error_approx(&t1, &t2, &tty, &cmp_cfg(seed, 2_000)).unwrap().verdict;
        if low.is_fails() {
            let high = compare_error_approx(&t1, &t2, &tty, &cmp_cfg(seed, 8_000)).unwrap().verdict;
            prop_assert!(high.is_fails(), "{}", high);
        }
    }
}

#[test]
fn every_type_prints_and_parses() {
    fn all(depth: usize) -> Vec<GType> {
        if depth == 0 {
            return vec![GType::Dyn, GType::Unit];
        }
        let smaller = all(depth - 1);
        let mut out = smaller.clone();
        for a in &smaller {
            for b in &smaller {
                out.push(GType::prod(a.clone(), b.clone()));
                out.push(GType::sum(a.clone(), b.clone()));
                out.push(GType::fun(a.clone(), b.clone()));
            }
        }
        out
    }
    for ty in all(2) {
        assert_eq!(parse_type(&ty.to_string()).unwrap(), ty);
        let tt = translate_type(&ty);
        assert_eq!(parse_ttype(&tt.to_string()).unwrap(), tt);
    }
}
