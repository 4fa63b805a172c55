//! Seeded property suites. Every case is a pure function of
//! `(config, suite, index)`, so suites shard across threads and any failing
//! case can be re-run in isolation with [`run_case`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{build_graduality_pair, compare_equiv, compare_error_approx, Cause, CompareConfig, Verdict, Witness};
use crate::dynamism::{check_dynamism, deriv_compose, deriv_id, deriv_top, ep_cast, Deriv, Mode};
use crate::elaborate::{cast_ctx, translate_term, translate_type};
use crate::gradual::{check_gradual, step_gradual, GEnv, GType, Step};
use crate::outcome::{Outcome, Stuck};
use crate::propgen::{Gen, GenConfig, TYPED_FUEL_FACTOR};
use crate::typed::{check_typed, eval_typed, step_typed, TEnv, TStep, TTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Retraction,
    Projection,
    Purity,
    Termination,
    Reflexivity,
    Decomposition,
    UdAreCasts,
    Factorization,
    Adequacy,
    Graduality,
    Meta,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Retraction,
        Suite::Projection,
        Suite::Purity,
        Suite::Termination,
        Suite::Reflexivity,
        Suite::Decomposition,
        Suite::UdAreCasts,
        Suite::Factorization,
        Suite::Adequacy,
        Suite::Graduality,
        Suite::Meta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Retraction => "retraction",
            Suite::Projection => "projection",
            Suite::Purity => "purity",
            Suite::Termination => "termination",
            Suite::Reflexivity => "reflexivity",
            Suite::Decomposition => "decomposition",
            Suite::UdAreCasts => "ud_are_casts",
            Suite::Factorization => "factorization",
            Suite::Adequacy => "adequacy",
            Suite::Graduality => "graduality",
            Suite::Meta => "meta",
        }
    }

    /// Corpus tag. The four ep-pair suites share one corpus.
    fn tag(self) -> &'static str {
        match self {
            Suite::Retraction | Suite::Projection | Suite::Purity | Suite::Termination => "ep",
            s => s.name(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite `{0}`")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Suite, UnknownSuite> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum CaseVerdict {
    Holds,
    Fails {
        reason: String,
        /// Present when the failure is a typed comparison that can be replayed directly.
        witness: Option<Box<Witness>>,
    },
    Inconclusive {
        cause: Cause,
    },
    /// The generator produced no usable case; not counted.
    Rejected,
}

impl CaseVerdict {
    fn fails(reason: impl Into<String>) -> CaseVerdict {
        CaseVerdict::Fails {
            reason: reason.into(),
            witness: None,
        }
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, CaseVerdict::Fails { .. })
    }

    /// Fails dominates Inconclusive, which dominates Holds.
    fn and(self, other: CaseVerdict) -> CaseVerdict {
        use CaseVerdict::*;
        match (self, other) {
            (f @ Fails { .. }, _) | (_, f @ Fails { .. }) => f,
            (r @ Rejected, _) | (_, r @ Rejected) => r,
            (i @ Inconclusive { .. }, _) | (_, i @ Inconclusive { .. }) => i,
            _ => Holds,
        }
    }

    fn with_context(self, context: &str) -> CaseVerdict {
        match self {
            CaseVerdict::Fails { reason, witness } => CaseVerdict::Fails {
                reason: format!("{context}: {reason}"),
                witness,
            },
            v => v,
        }
    }
}

impl From<Verdict> for CaseVerdict {
    fn from(v: Verdict) -> CaseVerdict {
        match v {
            Verdict::Holds => CaseVerdict::Holds,
            Verdict::Inconclusive { cause } => CaseVerdict::Inconclusive { cause },
            Verdict::Fails { witness } => CaseVerdict::Fails {
                reason: witness.reason.clone(),
                witness: Some(witness),
            },
        }
    }
}

/// One case's result plus named counters (coverage, rule firings, ...).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub index: u64,
    pub verdict: CaseVerdict,
    /// What the case exercised, for the report.
    pub summary: String,
    pub counters: BTreeMap<String, u64>,
}

/// A failing case with enough to re-run it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub suite: Suite,
    pub index: u64,
    pub config: GenConfig,
    pub summary: String,
    pub reason: String,
    pub witness: Option<Box<Witness>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: u64,
    pub holds: u64,
    pub fails: u64,
    pub inconclusive: u64,
    pub wall_ms: u64,
    pub config: GenConfig,
    pub failures: Vec<CaseFailure>,
    pub counters: BTreeMap<String, u64>,
}

impl SuiteReport {
    pub fn inconclusive_rate(&self) -> f64 {
        if self.cases == 0 {
            0.0
        } else {
            self.inconclusive as f64 / self.cases as f64
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} cases, {} holds, {} fails, {} inconclusive ({} ms)",
            self.suite, self.cases, self.holds, self.fails, self.inconclusive, self.wall_ms
        )
    }
}

struct Ctx {
    counters: BTreeMap<String, u64>,
    summary: String,
}

impl Ctx {
    fn bump(&mut self, key: impl Into<String>) {
        *self.counters.entry(key.into()).or_default() += 1;
    }
}

/// Runs case `index` of `suite`.
pub fn run_case(suite: Suite, cfg: &GenConfig, index: u64) -> CaseResult {
    let mut g = Gen::for_case(cfg, suite.tag(), index);
    let mut ctx = Ctx {
        counters: BTreeMap::new(),
        summary: String::new(),
    };
    let verdict = match case(suite, &mut g, &mut ctx) {
        Ok(v) => v,
        Err(stuck) => CaseVerdict::fails(stuck.to_string()),
    };
    CaseResult {
        index,
        verdict,
        summary: ctx.summary,
        counters: ctx.counters,
    }
}

fn case(suite: Suite, g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    match suite {
        Suite::Retraction | Suite::Projection | Suite::Purity | Suite::Termination => ep_case(suite, g, ctx),
        Suite::Reflexivity => reflexivity_case(g, ctx),
        Suite::Decomposition => decomposition_case(g, ctx),
        Suite::UdAreCasts => ud_case(g, ctx),
        Suite::Factorization => factorization_case(g, ctx),
        Suite::Adequacy => adequacy_case(g, ctx),
        Suite::Graduality => graduality_case(g, ctx),
        Suite::Meta => meta_case(g, ctx),
    }
}

fn compare_cfg(g: &mut Gen) -> CompareConfig {
    let seed = g.rng().gen();
    CompareConfig::from_gen(g.config(), seed)
}

fn typed_value(g: &mut Gen, ty: &GType) -> TTerm {
    translate_term(&g.gen_value(ty))
}

/// `(A, B, c : A <= B)` with `B` random.
fn related_pair(g: &mut Gen) -> (GType, GType, Deriv) {
    let b = g.gen_type();
    let a = g.gen_related_type(&b);
    let c = check_dynamism(&a, &b).expect("generated types are related");
    (a, b, c)
}

fn ep_case(suite: Suite, g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let (a, b, c) = related_pair(g);
    let va = typed_value(g, &a);
    let vb = typed_value(g, &b);
    let cmp = compare_cfg(g);
    let (e, p) = (ep_cast(Mode::E, &c), ep_cast(Mode::P, &c));
    ctx.summary = format!("{c} : {a} <= {b}");
    Ok(match suite {
        Suite::Retraction => {
            let round = p.plug(&e.plug(&va));
            compare_equiv(&round, &va, &translate_type(&a), &cmp)?.verdict.into()
        }
        Suite::Projection => {
            let round = e.plug(&p.plug(&vb));
            compare_error_approx(&round, &vb, &translate_type(&b), &cmp)?.verdict.into()
        }
        Suite::Purity => match eval_typed(&e.plug(&va), cmp.fuel)?.outcome {
            Outcome::Value(_) => CaseVerdict::Holds,
            o => CaseVerdict::fails(format!("embedding of {va} produced {}", o.kind())),
        },
        _ => match eval_typed(&p.plug(&vb), cmp.fuel)?.outcome {
            Outcome::FuelExhausted(_) => CaseVerdict::fails(format!("projection of {vb} ran out of fuel")),
            o => {
                ctx.bump(format!("projection_{}", o.kind()));
                CaseVerdict::Holds
            }
        },
    })
}

fn reflexivity_case(g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let a = g.gen_type();
    let v = typed_value(g, &a);
    let cmp = compare_cfg(g);
    let id = deriv_id(&a);
    ctx.summary = format!("{id}");
    let ty = translate_type(&a);
    let mut verdict = CaseVerdict::Holds;
    for mode in [Mode::E, Mode::P] {
        let r: CaseVerdict = compare_equiv(&ep_cast(mode, &id).plug(&v), &v, &ty, &cmp)?.verdict.into();
        verdict = verdict.and(r.with_context(&format!("mode {mode}")));
    }
    Ok(verdict)
}

fn decomposition_case(g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let a3 = g.gen_type();
    let a2 = g.gen_related_type(&a3);
    let a1 = g.gen_related_type(&a2);
    let c = check_dynamism(&a1, &a2).expect("related");
    let c2 = check_dynamism(&a2, &a3).expect("related");
    let composed = match deriv_compose(&c2, &c) {
        Ok(d) => d,
        Err(e) => return Ok(CaseVerdict::fails(e.to_string())),
    };
    if Some(&composed) != check_dynamism(&a1, &a3).as_ref() {
        return Ok(CaseVerdict::fails(format!("{composed} is not the canonical derivation of {a1} <= {a3}")));
    }
    ctx.summary = format!("{a1} <= {a2} <= {a3}");
    let v1 = typed_value(g, &a1);
    let v3 = typed_value(g, &a3);
    let cmp = compare_cfg(g);
    let up = compare_equiv(
        &ep_cast(Mode::E, &composed).plug(&v1),
        &ep_cast(Mode::E, &c2).plug(&ep_cast(Mode::E, &c).plug(&v1)),
        &translate_type(&a3),
        &cmp,
    )?;
    let down = compare_equiv(
        &ep_cast(Mode::P, &composed).plug(&v3),
        &ep_cast(Mode::P, &c).plug(&ep_cast(Mode::P, &c2).plug(&v3)),
        &translate_type(&a1),
        &cmp,
    )?;
    Ok(CaseVerdict::from(up.verdict)
        .with_context("embedding")
        .and(CaseVerdict::from(down.verdict).with_context("projection")))
}

fn ud_case(g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let (a, b, c) = related_pair(g);
    ctx.summary = format!("{a} <= {b}");
    let va = typed_value(g, &a);
    let vb = typed_value(g, &b);
    let cmp = compare_cfg(g);
    let up = compare_equiv(
        &cast_ctx(&a, &b).plug(&va),
        &ep_cast(Mode::E, &c).plug(&va),
        &translate_type(&b),
        &cmp,
    )?;
    let down = compare_equiv(
        &cast_ctx(&b, &a).plug(&vb),
        &ep_cast(Mode::P, &c).plug(&vb),
        &translate_type(&a),
        &cmp,
    )?;
    Ok(CaseVerdict::from(up.verdict)
        .with_context("upcast")
        .and(CaseVerdict::from(down.verdict).with_context("downcast")))
}

/// Every fifth case forces distinct tags so the mismatch row is always covered.
fn factorization_case(g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let a1 = g.gen_type();
    let force_mismatch = g.rng().gen_ratio(1, 5) && !a1.is_dyn();
    let mut a2 = g.gen_type();
    if force_mismatch {
        while a2.is_dyn() || a2.floor().ok() == a1.floor().ok() {
            a2 = g.gen_type();
        }
    }
    let mismatch = !a1.is_dyn() && !a2.is_dyn() && a1.floor().ok() != a2.floor().ok();
    if mismatch {
        ctx.bump("tag_mismatch");
    }
    ctx.summary = format!("<{a1} => {a2}>");
    let v = typed_value(g, &a1);
    let cmp = compare_cfg(g);
    let direct = cast_ctx(&a1, &a2).plug(&v);
    let through = ep_cast(Mode::P, &deriv_top(&a2)).plug(&ep_cast(Mode::E, &deriv_top(&a1)).plug(&v));
    let verdict = compare_equiv(&direct, &through, &translate_type(&a2), &cmp)?.verdict;
    if mismatch && eval_typed(&direct, cmp.fuel)?.outcome.is_error() {
        ctx.bump("tag_mismatch_error");
    }
    Ok(verdict.into())
}

fn adequacy_case(g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let (t, a) = g.gen_program();
    ctx.summary = t.to_string();
    let cmp = compare_cfg(g);
    let fuel = g.config().fuel;
    let translated = translate_term(&t);
    let typed = eval_typed(&translated, cmp.fuel)?.outcome;
    let mut gradual = crate::gradual::eval_gradual(&t, fuel)?;
    // The typed side got 16x the budget; give the gradual side the same before calling it a miss.
    if gradual.is_exhausted() && !typed.is_exhausted() {
        ctx.bump("gradual_refuel");
        gradual = crate::gradual::eval_gradual(&t, fuel * TYPED_FUEL_FACTOR)?;
    }
    ctx.bump(format!("gradual_{}", gradual.kind()));
    Ok(match (&gradual, &typed) {
        (Outcome::TypeError, Outcome::TypeError) => CaseVerdict::Holds,
        (Outcome::FuelExhausted(_), Outcome::FuelExhausted(_)) => CaseVerdict::Holds,
        (Outcome::FuelExhausted(_), _) | (_, Outcome::FuelExhausted(_)) => {
            CaseVerdict::Inconclusive { cause: Cause::Fuel }
        }
        (Outcome::Value(v), Outcome::Value(w)) => {
            let r: CaseVerdict = compare_equiv(&translate_term(v), w, &translate_type(&a), &cmp)?.verdict.into();
            r.with_context(&format!("gradual value {v}"))
        }
        (g, t) => CaseVerdict::fails(format!("gradual {} but typed {}", g.kind(), t.kind())),
    })
}

fn graduality_case(g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let (t2, _) = g.gen_program();
    let Some((t1, t2)) = g.mutate_less_dynamic(&t2) else {
        return Ok(CaseVerdict::Rejected);
    };
    let b1 = crate::gradual::typecheck_gradual(&GEnv::new(), &t1).expect("mutation filter typechecks");
    let b2 = crate::gradual::typecheck_gradual(&GEnv::new(), &t2).expect("generator typechecks");
    let c = check_dynamism(&b1, &b2).expect("mutation filter relates the types");
    ctx.summary = format!("{t1}  <=  {t2}");
    let cmp = compare_cfg(g);
    let (lhs, rhs, ty) = build_graduality_pair(&t1, &t2, &c).map_err(|e| Stuck(e.to_string()))?;
    Ok(compare_error_approx(&lhs, &rhs, &ty, &cmp)?.verdict.into())
}

/// Subject reduction, progress, determinism and value stability on every
/// step, in both languages, plus unroll-weight soundness.
fn meta_case(g: &mut Gen, ctx: &mut Ctx) -> Result<CaseVerdict, Stuck> {
    let (t, a) = g.gen_program();
    ctx.summary = t.to_string();
    let fuel = g.config().fuel;
    let genv = GEnv::new();
    let start = translate_term(&t);
    let mut current = t;
    for _ in 0..fuel {
        let first = match step_gradual(&current) {
            Ok(s) => s,
            Err(e) => return Ok(CaseVerdict::fails(format!("progress (gradual): {e}"))),
        };
        if first != step_gradual(&current)? {
            return Ok(CaseVerdict::fails(format!("determinism (gradual) at {current}")));
        }
        match first {
            Step::Terminal => {
                if !(current.is_value() || current.is_err()) {
                    return Ok(CaseVerdict::fails(format!("progress (gradual): terminal {current}")));
                }
                break;
            }
            Step::Stepped(next, rule) => {
                if current.is_value() {
                    return Ok(CaseVerdict::fails(format!("value {current} steps by {rule}")));
                }
                ctx.bump(format!("rule.{}", rule.name()));
                if let Err(e) = check_gradual(&genv, &next, &a) {
                    return Ok(CaseVerdict::fails(format!("subject reduction (gradual) by {rule}: {e}")));
                }
                current = next;
            }
        }
    }
    let tty = translate_type(&a);
    let tenv = TEnv::new();
    let mut current: TTerm = start.clone();
    let mut unrolls = 0;
    let mut taken = 0;
    for _ in 0..fuel {
        let first = match step_typed(&current) {
            Ok(s) => s,
            Err(e) => return Ok(CaseVerdict::fails(format!("progress (typed): {e}"))),
        };
        if first != step_typed(&current)? {
            return Ok(CaseVerdict::fails(format!("determinism (typed) at {current}")));
        }
        match first {
            TStep::Terminal => {
                if !(current.is_value() || current.is_err()) {
                    return Ok(CaseVerdict::fails(format!("progress (typed): terminal {current}")));
                }
                break;
            }
            TStep::Stepped(next, rule) => {
                if current.is_value() {
                    return Ok(CaseVerdict::fails(format!("typed value {current} steps by {rule}")));
                }
                taken += 1;
                unrolls += rule.weight();
                if let Err(e) = check_typed(&tenv, &next, &tty) {
                    return Ok(CaseVerdict::fails(format!("subject reduction (typed) by {rule}: {e}")));
                }
                current = next;
            }
        }
    }
    let replay = eval_typed(&start, taken)?;
    if replay.unrolls != unrolls {
        return Ok(CaseVerdict::fails(format!("unroll weight {} but {unrolls} unrolls fired", replay.unrolls)));
    }
    Ok(CaseVerdict::Holds)
}

/// Runs `count` cases (or, for graduality, until `count` pairs are accepted).
pub fn run_suite(suite: Suite, cfg: &GenConfig, count: u64) -> SuiteReport {
    let start = Instant::now();
    let mut results = if suite == Suite::Graduality {
        accepted_cases(suite, cfg, count)
    } else {
        (0..count).into_par_iter().map(|i| run_case(suite, cfg, i)).collect()
    };
    results.sort_by_key(|r| r.index);
    let mut report = SuiteReport {
        suite,
        cases: 0,
        holds: 0,
        fails: 0,
        inconclusive: 0,
        wall_ms: 0,
        config: cfg.clone(),
        failures: Vec::new(),
        counters: BTreeMap::new(),
    };
    for r in results {
        for (k, v) in r.counters {
            *report.counters.entry(k).or_default() += v;
        }
        match r.verdict {
            CaseVerdict::Rejected => {
                *report.counters.entry("rejected".into()).or_default() += 1;
                continue;
            }
            CaseVerdict::Holds => report.holds += 1,
            CaseVerdict::Inconclusive { cause } => {
                report.inconclusive += 1;
                let key = match cause {
                    Cause::Fuel => "inconclusive_fuel",
                    Cause::Sampling => "inconclusive_sampling",
                };
                *report.counters.entry(key.into()).or_default() += 1;
            }
            CaseVerdict::Fails { reason, witness } => {
                report.fails += 1;
                report.failures.push(CaseFailure {
                    suite,
                    index: r.index,
                    config: cfg.clone(),
                    summary: r.summary,
                    reason,
                    witness,
                });
            }
        }
        report.cases += 1;
    }
    report.wall_ms = start.elapsed().as_millis() as u64;
    report
}

/// Attempts graduality cases in parallel batches until `count` are accepted
/// or the attempt budget (50 per wanted pair) runs out.
fn accepted_cases(suite: Suite, cfg: &GenConfig, count: u64) -> Vec<CaseResult> {
    let budget = count.saturating_mul(50);
    let mut out: Vec<CaseResult> = Vec::new();
    let mut next = 0;
    let accepted = |rs: &[CaseResult]| rs.iter().filter(|r| r.verdict != CaseVerdict::Rejected).count() as u64;
    while accepted(&out) < count && next < budget {
        let batch = (count - accepted(&out)).max(16) * 2;
        let end = (next + batch).min(budget);
        out.extend((next..end).into_par_iter().map(|i| run_case(suite, cfg, i)).collect::<Vec<_>>());
        next = end;
    }
    // Keep the shortest prefix with `count` accepted cases so the result
    // does not depend on batch sizes.
    let mut seen = 0;
    let cut = out
        .iter()
        .position(|r| {
            if r.verdict != CaseVerdict::Rejected {
                seen += 1;
            }
            seen == count
        })
        .map_or(out.len(), |p| p + 1);
    out.truncate(cut);
    out
}

/// Re-runs a recorded failure.
pub fn replay_failure(f: &CaseFailure) -> CaseResult {
    run_case(f.suite, &f.config, f.index)
}

#[cfg(test)]
fn sample_cfg() -> GenConfig {
    GenConfig {
        seed: 11,
        ..GenConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_runs_pass() {
        for s in Suite::ALL {
            let r = run_suite(s, &sample_cfg(), 12);
            assert_eq!(r.fails, 0, "{r}: {:?}", r.failures);
            assert_eq!(r.holds + r.fails + r.inconclusive, r.cases);
        }
    }

    #[test]
    fn cases_are_deterministic() {
        for s in [Suite::Retraction, Suite::Adequacy, Suite::Graduality] {
            assert_eq!(run_case(s, &sample_cfg(), 3), run_case(s, &sample_cfg(), 3));
        }
    }

    #[test]
    fn graduality_counts_accepted_pairs() {
        let r = run_suite(Suite::Graduality, &sample_cfg(), 10);
        assert_eq!(r.cases, 10);
    }

    #[test]
    fn factorization_covers_the_mismatch_row() {
        let r = run_suite(Suite::Factorization, &sample_cfg(), 40);
        assert!(r.counters.get("tag_mismatch").copied().unwrap_or(0) > 0);
    }
}
