//! Shared loader for the hand-stepped golden corpus.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use lamg_core::gradual::{parse_term, trace_gradual, typecheck_gradual, GTerm, Rule};
use lamg_core::{Env, Outcome};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub struct Golden {
    pub name: String,
    pub program: GTerm,
    pub fuel: u64,
    pub steps: Vec<(Rule, GTerm)>,
    pub outcome: String,
}

fn parse_golden(lamg: &Path) -> Result<Golden, String> {
    let name = lamg.file_stem().unwrap().to_string_lossy().into_owned();
    let src = fs::read_to_string(lamg).map_err(|e| e.to_string())?;
    let program = parse_term(&src).map_err(|e| format!("{name}: {e}"))?;
    let trace = fs::read_to_string(lamg.with_extension("trace")).map_err(|e| format!("{name}.trace: {e}"))?;
    let mut fuel = 100;
    let mut steps = Vec::new();
    let mut outcome = None;
    for line in trace.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (head, rest) = line.split_once(':').ok_or_else(|| format!("{name}: bad line `{line}`"))?;
        let rest = rest.trim();
        match head {
            "fuel" => fuel = rest.parse().map_err(|_| format!("{name}: bad fuel"))?,
            "outcome" => outcome = Some(rest.to_string()),
            rule => {
                let rule = Rule::from_name(rule).ok_or_else(|| format!("{name}: unknown rule {rule}"))?;
                let term = parse_term(rest).map_err(|e| format!("{name}: {e} in `{rest}`"))?;
                steps.push((rule, term));
            }
        }
    }
    Ok(Golden {
        name,
        program,
        fuel,
        steps,
        outcome: outcome.ok_or_else(|| "missing outcome".to_string())?,
    })
}

pub fn load_golden() -> Vec<Result<Golden, String>> {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus_dir().join("golden"))
        .expect("corpus/golden")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "lamg"))
        .collect();
    files.sort();
    files.iter().map(|p| parse_golden(p)).collect()
}

/// Replays a golden program and compares every step.
pub fn check_golden(g: &Golden) -> Result<(), String> {
    typecheck_gradual(&Env::new(), &g.program).map_err(|e| format!("{}: {e}", g.name))?;
    let trace = trace_gradual(&g.program, g.fuel, true).map_err(|e| format!("{}: {e}", g.name))?;
    if trace.steps.len() != g.steps.len() {
        return Err(format!("{}: {} steps, expected {}", g.name, trace.steps.len(), g.steps.len()));
    }
    for (i, ((rule, term), (want_rule, want_term))) in trace.steps.iter().zip(&g.steps).enumerate() {
        if rule != want_rule || term != want_term {
            return Err(format!("{}: step {}: got {rule} {term}, expected {want_rule} {want_term}", g.name, i + 1));
        }
    }
    let kind = match trace.outcome {
        Outcome::Value(_) => "value",
        Outcome::TypeError => "error",
        Outcome::FuelExhausted(_) => "fuel",
    };
    if kind != g.outcome {
        return Err(format!("{}: outcome {kind}, expected {}", g.name, g.outcome));
    }
    Ok(())
}
