//! Seeded generators for types, well-typed terms and values, and the
//! less-dynamic mutation used to build graduality pairs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamism::check_term_dynamism;
use crate::gradual::{typecheck_gradual, GEnv, GTerm, GType};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub max_type_depth: usize,
    pub max_term_size: usize,
    pub cast_probability: f64,
    /// Gradual step budget; typed evaluation gets `TYPED_FUEL_FACTOR` times this.
    pub fuel: u64,
    /// Arguments sampled per function comparison.
    pub samples: usize,
    pub err_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_type_depth: 3,
            max_term_size: 24,
            cast_probability: 0.3,
            fuel: 2000,
            samples: 8,
            err_probability: 0.02,
        }
    }
}

/// Typed fuel per unit of gradual fuel.
pub const TYPED_FUEL_FACTOR: u64 = 16;

impl GenConfig {
    pub fn typed_fuel(&self) -> u64 {
        self.fuel.saturating_mul(TYPED_FUEL_FACTOR)
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Independent stream for case `index` of corpus `tag`.
pub fn case_rng(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(tag));
    rng.set_stream(index);
    rng
}

/// The smallest closed value of each type.
pub fn canonical_value(ty: &GType) -> GTerm {
    match ty {
        GType::Dyn => GTerm::cast(GType::Unit, GType::Dyn, GTerm::Unit),
        GType::Unit => GTerm::Unit,
        GType::Prod(a, b) => GTerm::pair(canonical_value(a), canonical_value(b)),
        GType::Sum(a, _) => GTerm::inl(ty.clone(), canonical_value(a)),
        GType::Fun(a, b) => GTerm::lam((**a).clone(), canonical_value(b)),
    }
}

pub struct Gen {
    cfg: GenConfig,
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(cfg: &GenConfig, rng: ChaCha8Rng) -> Gen {
        Gen { cfg: cfg.clone(), rng }
    }

    /// Generator for case `index` of corpus `tag` under `cfg.seed`.
    pub fn for_case(cfg: &GenConfig, tag: &str, index: u64) -> Gen {
        Gen::new(cfg, case_rng(cfg.seed, tag, index))
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.gen_bool(p.min(1.0))
    }

    pub fn gen_type(&mut self) -> GType {
        self.type_of_depth(self.cfg.max_type_depth)
    }

    pub fn type_of_depth(&mut self, depth: usize) -> GType {
        if depth <= 1 {
            return if self.rng.gen_bool(0.5) { GType::Dyn } else { GType::Unit };
        }
        match self.rng.gen_range(0..10) {
            0 | 1 => GType::Dyn,
            2 | 3 => GType::Unit,
            4 | 5 => GType::prod(self.type_of_depth(depth - 1), self.type_of_depth(depth - 1)),
            6 | 7 => GType::sum(self.type_of_depth(depth - 1), self.type_of_depth(depth - 1)),
            _ => GType::fun(self.type_of_depth(depth - 1), self.type_of_depth(depth - 1)),
        }
    }

    /// A type less dynamic than `b`: each `?` may be replaced by any type.
    pub fn gen_related_type(&mut self, b: &GType) -> GType {
        self.related_at(b, self.cfg.max_type_depth)
    }

    fn related_at(&mut self, b: &GType, depth: usize) -> GType {
        match b {
            GType::Dyn => {
                if self.rng.gen_bool(0.3) {
                    GType::Dyn
                } else {
                    self.type_of_depth(depth.max(1))
                }
            }
            GType::Unit => GType::Unit,
            GType::Prod(x, y) => GType::prod(self.related_at(x, depth.saturating_sub(1)), self.related_at(y, depth.saturating_sub(1))),
            GType::Sum(x, y) => GType::sum(self.related_at(x, depth.saturating_sub(1)), self.related_at(y, depth.saturating_sub(1))),
            GType::Fun(x, y) => GType::fun(self.related_at(x, depth.saturating_sub(1)), self.related_at(y, depth.saturating_sub(1))),
        }
    }

    /// A type more dynamic than `a`: subtrees are replaced by `?` at random.
    pub fn raise(&mut self, a: &GType) -> GType {
        if a.is_dyn() || self.rng.gen_bool(0.35) {
            return GType::Dyn;
        }
        match a {
            GType::Prod(x, y) => GType::prod(self.raise(x), self.raise(y)),
            GType::Sum(x, y) => GType::sum(self.raise(x), self.raise(y)),
            GType::Fun(x, y) => GType::fun(self.raise(x), self.raise(y)),
            _ => a.clone(),
        }
    }

    /// A random closed value of type `ty`.
    pub fn gen_value(&mut self, ty: &GType) -> GTerm {
        self.value_at(ty, self.cfg.max_type_depth)
    }

    fn value_at(&mut self, ty: &GType, depth: usize) -> GTerm {
        match ty {
            GType::Unit => GTerm::Unit,
            GType::Prod(a, b) => GTerm::pair(self.value_at(a, depth), self.value_at(b, depth)),
            GType::Sum(a, b) => {
                if self.rng.gen_bool(0.5) {
                    GTerm::inl(ty.clone(), self.value_at(a, depth))
                } else {
                    GTerm::inr(ty.clone(), self.value_at(b, depth))
                }
            }
            GType::Fun(a, b) => {
                let budget = self.rng.gen_range(1..=6);
                let mut env = GEnv::from_outermost(vec![(**a).clone()]);
                GTerm::lam((**a).clone(), self.term(&mut env, b, budget))
            }
            GType::Dyn => {
                let tag = if depth <= 1 {
                    GType::Unit
                } else {
                    GType::tags().choose(&mut self.rng).cloned().expect("four tags")
                };
                GTerm::cast(tag.clone(), GType::Dyn, self.value_at(&tag, depth - 1))
            }
        }
    }

    /// A term of type `target` in `env`, of roughly `max_term_size` nodes.
    pub fn gen_term(&mut self, env: &GEnv, target: &GType) -> GTerm {
        let mut env = env.clone();
        let size = self.rng.gen_range(1..=self.cfg.max_term_size.max(1));
        self.term(&mut env, target, size)
    }

    /// A closed term at a random type.
    pub fn gen_program(&mut self) -> (GTerm, GType) {
        let ty = self.gen_type();
        let t = self.gen_term(&GEnv::new(), &ty);
        (t, ty)
    }

    fn small_type(&mut self) -> GType {
        self.type_of_depth(self.cfg.max_type_depth.min(2))
    }

    fn term(&mut self, env: &mut GEnv, target: &GType, size: usize) -> GTerm {
        if self.chance(self.cfg.err_probability) {
            return GTerm::Err(target.clone());
        }
        if size <= 1 {
            return self.leaf(env, target);
        }
        if self.chance(self.cfg.cast_probability) {
            return self.cast_to(env, target, size);
        }
        match self.rng.gen_range(0..12) {
            0..=5 => self.intro(env, target, size),
            6 | 7 => {
                let arg = self.small_type();
                let half = (size - 1) / 2;
                let f = self.term(env, &GType::fun(arg.clone(), target.clone()), half.max(1));
                let a = self.term(env, &arg, (size - 1 - half).max(1));
                GTerm::app(f, a)
            }
            8 => {
                let (a, b) = (self.small_type(), self.small_type());
                let third = (size / 3).max(1);
                let s = self.term(env, &GType::prod(a.clone(), b.clone()), third);
                env.push(a);
                env.push(b);
                let body = self.term(env, target, size - third);
                env.pop();
                env.pop();
                GTerm::match_pair(s, body)
            }
            9 => {
                let (a, b) = (self.small_type(), self.small_type());
                let third = (size / 3).max(1);
                let s = self.term(env, &GType::sum(a.clone(), b.clone()), third);
                env.push(a);
                let l = self.term(env, target, third);
                env.pop();
                env.push(b);
                let r = self.term(env, target, third);
                env.pop();
                GTerm::case(s, l, r)
            }
            _ => match self.var_of(env, target) {
                Some(v) => v,
                None => self.intro(env, target, size),
            },
        }
    }

    fn var_of(&mut self, env: &GEnv, target: &GType) -> Option<GTerm> {
        let candidates: Vec<usize> = env.indexed().filter(|(_, ty)| *ty == target).map(|(i, _)| i).collect();
        candidates.choose(&mut self.rng).map(|i| GTerm::Var(*i))
    }

    /// Casts into `target` from an upcast, downcast or arbitrary pivot.
    fn cast_to(&mut self, env: &mut GEnv, target: &GType, size: usize) -> GTerm {
        let pivot = match self.rng.gen_range(0..3) {
            0 => self.gen_related_type(target),
            1 => self.raise(target),
            _ => self.gen_type(),
        };
        let body = self.term(env, &pivot, size - 1);
        GTerm::cast(pivot, target.clone(), body)
    }

    fn intro(&mut self, env: &mut GEnv, target: &GType, size: usize) -> GTerm {
        match target {
            GType::Unit => GTerm::Unit,
            GType::Prod(a, b) => {
                let half = ((size - 1) / 2).max(1);
                GTerm::pair(self.term(env, a, half), self.term(env, b, half))
            }
            GType::Sum(a, b) => {
                if self.rng.gen_bool(0.5) {
                    GTerm::inl(target.clone(), self.term(env, a, size - 1))
                } else {
                    GTerm::inr(target.clone(), self.term(env, b, size - 1))
                }
            }
            GType::Fun(a, b) => {
                env.push((**a).clone());
                let body = self.term(env, b, size - 1);
                env.pop();
                GTerm::lam((**a).clone(), body)
            }
            GType::Dyn => {
                let from = loop {
                    let t = self.small_type();
                    if !t.is_dyn() {
                        break t;
                    }
                };
                let body = self.term(env, &from, size - 1);
                GTerm::cast(from, GType::Dyn, body)
            }
        }
    }

    fn leaf(&mut self, env: &mut GEnv, target: &GType) -> GTerm {
        if self.rng.gen_bool(0.6) {
            if let Some(v) = self.var_of(env, target) {
                return v;
            }
        }
        match target {
            GType::Unit => GTerm::Unit,
            GType::Dyn => GTerm::cast(GType::Unit, GType::Dyn, self.leaf(env, &GType::Unit)),
            GType::Prod(a, b) => GTerm::pair(self.leaf(env, a), self.leaf(env, b)),
            GType::Sum(a, b) => {
                if self.rng.gen_bool(0.5) {
                    GTerm::inl(target.clone(), self.leaf(env, a))
                } else {
                    GTerm::inr(target.clone(), self.leaf(env, b))
                }
            }
            GType::Fun(a, b) => {
                env.push((**a).clone());
                let body = self.leaf(env, b);
                env.pop();
                GTerm::lam((**a).clone(), body)
            }
        }
    }

    /// Rewrites some type annotations of the closed term `t2` to less dynamic
    /// types and keeps the result only if it is well typed and syntactically
    /// less dynamic than `t2`.
    pub fn mutate_less_dynamic(&mut self, t2: &GTerm) -> Option<(GTerm, GTerm)> {
        let sites = annotation_sites(t2);
        if sites == 0 {
            return None;
        }
        let k = self.rng.gen_range(1..=sites.min(3));
        let chosen: Vec<usize> = rand::seq::index::sample(&mut self.rng, sites, k).into_vec();
        let mut counter = 0;
        let rewritten = self.rewrite(t2, &chosen, &mut counter);
        let (t1, _) = repair(&mut GEnv::new(), &rewritten)?;
        if t1 == *t2 {
            return None;
        }
        typecheck_gradual(&GEnv::new(), &t1).ok()?;
        check_term_dynamism(&GEnv::new(), &GEnv::new(), &t1, t2).ok()?;
        Some((t1, t2.clone()))
    }

    fn lower(&mut self, ty: &GType, site: usize, chosen: &[usize]) -> GType {
        if chosen.contains(&site) {
            self.gen_related_type(ty)
        } else {
            ty.clone()
        }
    }

    fn rewrite(&mut self, t: &GTerm, chosen: &[usize], counter: &mut usize) -> GTerm {
        let mut site = || {
            *counter += 1;
            *counter - 1
        };
        match t {
            GTerm::Err(_) | GTerm::Var(_) | GTerm::Unit => t.clone(),
            GTerm::Cast(from, to, body) => {
                let (s1, s2) = (site(), site());
                let from = self.lower(from, s1, chosen);
                let to = self.lower(to, s2, chosen);
                GTerm::cast(from, to, self.rewrite(body, chosen, counter))
            }
            GTerm::Lam(dom, body) => {
                let s = site();
                let dom = self.lower(dom, s, chosen);
                GTerm::lam(dom, self.rewrite(body, chosen, counter))
            }
            GTerm::Inl(sum, body) | GTerm::Inr(sum, body) => {
                let s = site();
                let sum = self.lower(sum, s, chosen);
                let body = self.rewrite(body, chosen, counter);
                if matches!(t, GTerm::Inl(..)) {
                    GTerm::inl(sum, body)
                } else {
                    GTerm::inr(sum, body)
                }
            }
            GTerm::Pair(a, b) => {
                let a = self.rewrite(a, chosen, counter);
                GTerm::pair(a, self.rewrite(b, chosen, counter))
            }
            GTerm::MatchPair(a, b) => {
                let a = self.rewrite(a, chosen, counter);
                GTerm::match_pair(a, self.rewrite(b, chosen, counter))
            }
            GTerm::App(a, b) => {
                let a = self.rewrite(a, chosen, counter);
                GTerm::app(a, self.rewrite(b, chosen, counter))
            }
            GTerm::Case(s, l, r) => {
                let s = self.rewrite(s, chosen, counter);
                let l = self.rewrite(l, chosen, counter);
                GTerm::case(s, l, self.rewrite(r, chosen, counter))
            }
        }
    }
}

/// Lambda domains, both cast endpoints, and injection annotations.
fn annotation_sites(t: &GTerm) -> usize {
    match t {
        GTerm::Err(_) | GTerm::Var(_) | GTerm::Unit => 0,
        GTerm::Cast(_, _, b) => 2 + annotation_sites(b),
        GTerm::Lam(_, b) | GTerm::Inl(_, b) | GTerm::Inr(_, b) => 1 + annotation_sites(b),
        GTerm::Pair(a, b) | GTerm::MatchPair(a, b) | GTerm::App(a, b) => annotation_sites(a) + annotation_sites(b),
        GTerm::Case(s, l, r) => annotation_sites(s) + annotation_sites(l) + annotation_sites(r),
    }
}

/// Re-synthesizes cast sources and the injected side of injection annotations
/// bottom-up so that a mutated term has a chance to typecheck.
fn repair(env: &mut GEnv, t: &GTerm) -> Option<(GTerm, GType)> {
    Some(match t {
        GTerm::Err(ty) => (t.clone(), ty.clone()),
        GTerm::Var(i) => (t.clone(), env.lookup(*i)?.clone()),
        GTerm::Unit => (GTerm::Unit, GType::Unit),
        GTerm::Cast(_, to, body) => {
            let (b, ty) = repair(env, body)?;
            (GTerm::cast(ty, to.clone(), b), to.clone())
        }
        GTerm::Inl(sum, body) | GTerm::Inr(sum, body) => {
            let GType::Sum(l, r) = sum else { return None };
            let (b, ty) = repair(env, body)?;
            if matches!(t, GTerm::Inl(..)) {
                let sum = GType::sum(ty, (**r).clone());
                (GTerm::inl(sum.clone(), b), sum)
            } else {
                let sum = GType::sum((**l).clone(), ty);
                (GTerm::inr(sum.clone(), b), sum)
            }
        }
        GTerm::Lam(dom, body) => {
            env.push(dom.clone());
            let r = repair(env, body);
            env.pop();
            let (b, cod) = r?;
            (GTerm::lam(dom.clone(), b), GType::fun(dom.clone(), cod))
        }
        GTerm::Pair(a, b) => {
            let (a, ta) = repair(env, a)?;
            let (b, tb) = repair(env, b)?;
            (GTerm::pair(a, b), GType::prod(ta, tb))
        }
        GTerm::App(f, a) => {
            let (f, tf) = repair(env, f)?;
            let (a, _) = repair(env, a)?;
            let GType::Fun(_, cod) = tf else { return None };
            (GTerm::app(f, a), *cod)
        }
        GTerm::MatchPair(s, body) => {
            let (s, ts) = repair(env, s)?;
            let GType::Prod(x, y) = ts else { return None };
            env.push(*x);
            env.push(*y);
            let r = repair(env, body);
            env.pop();
            env.pop();
            let (b, tb) = r?;
            (GTerm::match_pair(s, b), tb)
        }
        GTerm::Case(s, l, r) => {
            let (s, ts) = repair(env, s)?;
            let GType::Sum(x, y) = ts else { return None };
            env.push(*x);
            let left = repair(env, l);
            env.pop();
            env.push(*y);
            let right = repair(env, r);
            env.pop();
            let ((l, tl), (r, _)) = (left?, right?);
            (GTerm::case(s, l, r), tl)
        }
    })
}

/// The `lamg gen` corpus: `count` closed programs.
pub fn gen_corpus(cfg: &GenConfig, count: usize) -> Vec<(GTerm, GType)> {
    (0..count)
        .map(|i| Gen::for_case(cfg, "corpus", i as u64).gen_program())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamism::check_dynamism;
    use crate::gradual::check_gradual;

    fn gens(n: u64) -> impl Iterator<Item = Gen> {
        let cfg = GenConfig::default();
        (0..n).map(move |i| Gen::for_case(&cfg, "test", i))
    }

    #[test]
    fn related_types_are_related() {
        for mut g in gens(1000) {
            let b = g.gen_type();
            let a = g.gen_related_type(&b);
            assert!(check_dynamism(&a, &b).is_some(), "{a} <= {b}");
            let c = g.raise(&a);
            assert!(check_dynamism(&a, &c).is_some(), "{a} <= {c}");
        }
        let mut g = gens(1).next().unwrap();
        assert_eq!(g.gen_related_type(&GType::Unit), GType::Unit);
    }

    #[test]
    fn generated_terms_typecheck() {
        for mut g in gens(2000) {
            let (t, ty) = g.gen_program();
            assert!(t.is_closed());
            check_gradual(&GEnv::new(), &t, &ty).unwrap_or_else(|e| panic!("{t} : {ty}: {e}"));
        }
    }

    #[test]
    fn generated_values_are_values() {
        for mut g in gens(500) {
            let ty = g.gen_type();
            let v = g.gen_value(&ty);
            assert!(v.is_value(), "{v}");
            check_gradual(&GEnv::new(), &v, &ty).unwrap();
        }
    }

    fn only_dyn_introductions(t: &GTerm) -> bool {
        match t {
            GTerm::Cast(_, to, b) => to.is_dyn() && only_dyn_introductions(b),
            GTerm::Err(_) | GTerm::Var(_) | GTerm::Unit => true,
            GTerm::Inl(_, b) | GTerm::Inr(_, b) | GTerm::Lam(_, b) => only_dyn_introductions(b),
            GTerm::Pair(a, b) | GTerm::MatchPair(a, b) | GTerm::App(a, b) => {
                only_dyn_introductions(a) && only_dyn_introductions(b)
            }
            GTerm::Case(s, l, r) => only_dyn_introductions(s) && only_dyn_introductions(l) && only_dyn_introductions(r),
        }
    }

    #[test]
    fn no_casts_without_cast_probability() {
        // `?` has no introduction form of its own, so injections remain.
        let cfg = GenConfig {
            cast_probability: 0.0,
            ..GenConfig::default()
        };
        for i in 0..300 {
            let (t, _) = Gen::for_case(&cfg, "nocast", i).gen_program();
            assert!(only_dyn_introductions(&t), "{t}");
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let cfg = GenConfig::default();
        assert_eq!(gen_corpus(&cfg, 50), gen_corpus(&cfg, 50));
        let other = GenConfig { seed: 1, ..cfg.clone() };
        assert_ne!(gen_corpus(&cfg, 50), gen_corpus(&other, 50));
    }

    #[test]
    fn mutation_of_a_dynamic_lambda() {
        let t2 = GTerm::lam(GType::Dyn, GTerm::Var(0));
        let mut hits = 0;
        for mut g in gens(50) {
            if let Some((t1, _)) = g.mutate_less_dynamic(&t2) {
                let GTerm::Lam(dom, _) = &t1 else { panic!() };
                assert!(check_dynamism(dom, &GType::Dyn).is_some());
                hits += 1;
            }
        }
        assert!(hits > 0);
    }

    #[test]
    fn mutation_acceptance_is_positive() {
        let cfg = GenConfig {
            err_probability: 0.0,
            ..GenConfig::default()
        };
        let accepted = (0..300)
            .filter(|i| {
                let mut g = Gen::for_case(&cfg, "mut", *i);
                let (t2, _) = g.gen_program();
                g.mutate_less_dynamic(&t2).is_some()
            })
            .count();
        assert!(accepted > 30, "accepted {accepted}");
    }
}
