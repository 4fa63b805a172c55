//! `lamg`: check, run, compile and compare gradual and typed programs, and
//! run the property suites.
//!
//! Exit codes: 0 success or holds, 1 fails, 2 usage/parse/type error,
//! 3 inconclusive only.

mod diag;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use lamg_core::approx::{compare_programs, replay_witness, CompareConfig, Comparison, Verdict, Witness};
use lamg_core::dynamism::{check_dynamism, check_term_dynamism};
use lamg_core::elaborate::{translate_term, translate_type};
use lamg_core::gradual::{parse_term, parse_type, trace_gradual, typecheck_gradual, GTerm};
use lamg_core::propgen::{gen_corpus, GenConfig};
use lamg_core::suites::{replay_failure, run_suite, CaseFailure, CaseVerdict, Suite};
use lamg_core::typed::{parse_tterm, trace_typed, typecheck_typed, TTerm};
use lamg_core::{Env, Outcome};

use diag::Failure;

#[derive(Parser)]
#[command(name = "lamg", version, about = "Gradual cast calculus workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gradual step budget; typed runs get 16 times this.
    #[arg(long, default_value_t = 2000)]
    fuel: u64,
    /// Arguments sampled per function comparison.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 3)]
    max_type_depth: usize,
    #[arg(long, default_value_t = 24)]
    max_term_size: usize,
    #[arg(long, default_value_t = 0.3)]
    cast_probability: f64,
}

impl GenArgs {
    fn config(&self) -> GenConfig {
        GenConfig {
            seed: self.seed,
            fuel: self.fuel,
            samples: self.samples,
            max_type_depth: self.max_type_depth,
            max_term_size: self.max_term_size,
            cast_probability: self.cast_probability,
            ..GenConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Typecheck a `.lamg` or `.lamt` file and print its type.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a gradual program.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 2000)]
        fuel: u64,
        /// Print every step with the rule that fired.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Translate a gradual program to the typed language.
    Compile {
        file: PathBuf,
        /// Output path; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a typed program, or the translation of a gradual one.
    RunTyped {
        file: PathBuf,
        #[arg(long, default_value_t = 32000)]
        fuel: u64,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print the canonical derivation of TYPE1 <= TYPE2, or `unrelated`.
    Dynamism {
        lower: String,
        upper: String,
        #[arg(long)]
        json: bool,
    },
    /// Check that FILE1 is syntactically less dynamic than FILE2.
    Precision {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Does FILE1 error-approximate FILE2?
    Approx {
        file1: PathBuf,
        file2: PathBuf,
        /// Typed step budget per evaluation.
        #[arg(long, default_value_t = 32000)]
        fuel: u64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check approximation in both directions.
        #[arg(long)]
        equiv: bool,
        /// Write the witness of a failing comparison here.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run a property suite.
    Props {
        suite: String,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[command(flatten)]
        gen: GenArgs,
        /// Directory for failure replay files.
        #[arg(long, default_value = "lamg-witnesses")]
        witness_dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print a generated corpus of closed programs.
    Gen {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[command(flatten)]
        gen: GenArgs,
        /// Write one `.lamg` file per program here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a witness or suite failure file.
    Replay {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            diag::report(&f);
            ExitCode::from(f.code())
        }
    }
}

const OK: u8 = 0;
const FAILS: u8 = 1;
const INCONCLUSIVE: u8 = 3;

fn run(cmd: Cmd) -> Result<u8, Failure> {
    match cmd {
        Cmd::Check { file, json } => cmd_check(&file, json),
        Cmd::Run { file, fuel, trace, json } => cmd_run(&file, fuel, trace, json),
        Cmd::Compile { file, output } => cmd_compile(&file, output.as_deref()),
        Cmd::RunTyped { file, fuel, trace, json } => cmd_run_typed(&file, fuel, trace, json),
        Cmd::Dynamism { lower, upper, json } => cmd_dynamism(&lower, &upper, json),
        Cmd::Precision { file1, file2, json } => cmd_precision(&file1, &file2, json),
        Cmd::Approx {
            file1,
            file2,
            fuel,
            samples,
            seed,
            equiv,
            witness,
            json,
        } => {
            let cfg = CompareConfig {
                fuel,
                samples,
                seed,
                ..CompareConfig::default()
            };
            cmd_approx(&file1, &file2, &cfg, equiv, witness.as_deref(), json)
        }
        Cmd::Props {
            suite,
            count,
            gen,
            witness_dir,
            json,
        } => cmd_props(&suite, count, &gen.config(), &witness_dir, json),
        Cmd::Gen { count, gen, out } => cmd_gen(count, &gen.config(), out.as_deref()),
        Cmd::Replay { file, json } => cmd_replay(&file, json),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.display().to_string(), e.to_string()))
}

fn is_typed(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "lamt")
}

fn load_gradual(path: &Path) -> Result<GTerm, Failure> {
    let src = read(path)?;
    parse_term(&src).map_err(|e| Failure::Parse(path.display().to_string(), e))
}

/// A typed program: parsed from `.lamt`, otherwise translated from `.lamg`.
fn load_typed(path: &Path) -> Result<TTerm, Failure> {
    if is_typed(path) {
        let src = read(path)?;
        parse_tterm(&src).map_err(|e| Failure::Parse(path.display().to_string(), e))
    } else {
        let t = load_gradual(path)?;
        typecheck_gradual(&Env::new(), &t).map_err(|e| Failure::Type(path.display().to_string(), e.to_string()))?;
        Ok(translate_term(&t))
    }
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_check(path: &Path, json: bool) -> Result<u8, Failure> {
    let ty = if is_typed(path) {
        let t = load_typed(path)?;
        typecheck_typed(&Env::new(), &t)
            .map_err(|e| Failure::Type(path.display().to_string(), e.to_string()))?
            .to_string()
    } else {
        let t = load_gradual(path)?;
        typecheck_gradual(&Env::new(), &t)
            .map_err(|e| Failure::Type(path.display().to_string(), e.to_string()))?
            .to_string()
    };
    if json {
        print_json(&json!({ "type": ty }));
    } else {
        println!("{ty}");
    }
    Ok(OK)
}

fn outcome_line<T: std::fmt::Display>(o: &Outcome<T>) -> String {
    match o {
        Outcome::Value(v) => format!("value: {v}"),
        Outcome::TypeError => "error: \u{2127}".to_string(),
        Outcome::FuelExhausted(t) => format!("fuel exhausted: {t}"),
    }
}

fn outcome_json<T: std::fmt::Display>(o: &Outcome<T>) -> serde_json::Value {
    match o {
        Outcome::Value(v) => json!({ "outcome": "value", "value": v.to_string() }),
        Outcome::TypeError => json!({ "outcome": "error" }),
        Outcome::FuelExhausted(t) => json!({ "outcome": "fuel", "term": t.to_string() }),
    }
}

fn cmd_run(path: &Path, fuel: u64, trace: bool, json: bool) -> Result<u8, Failure> {
    let t = load_gradual(path)?;
    typecheck_gradual(&Env::new(), &t).map_err(|e| Failure::Type(path.display().to_string(), e.to_string()))?;
    let tr = trace_gradual(&t, fuel, trace).map_err(|e| Failure::Internal(e.to_string()))?;
    if json {
        let mut out = outcome_json(&tr.outcome);
        out["steps"] = json!(tr.step_count);
        if trace {
            out["trace"] = tr.steps.iter().map(|(r, t)| json!({ "rule": r.name(), "term": t.to_string() })).collect();
        }
        print_json(&out);
    } else {
        for (rule, t) in &tr.steps {
            println!("{:>13}  {t}", rule.name());
        }
        println!("{}", outcome_line(&tr.outcome));
    }
    Ok(OK)
}

fn cmd_compile(path: &Path, output: Option<&Path>) -> Result<u8, Failure> {
    let t = load_gradual(path)?;
    let ty = typecheck_gradual(&Env::new(), &t).map_err(|e| Failure::Type(path.display().to_string(), e.to_string()))?;
    let text = format!("# : {}\n{}\n", translate_type(&ty), translate_term(&t));
    match output {
        Some(out) => fs::write(out, text).map_err(|e| Failure::Io(out.display().to_string(), e.to_string()))?,
        None => print!("{text}"),
    }
    Ok(OK)
}

fn cmd_run_typed(path: &Path, fuel: u64, trace: bool, json: bool) -> Result<u8, Failure> {
    let t = load_typed(path)?;
    typecheck_typed(&Env::new(), &t).map_err(|e| Failure::Type(path.display().to_string(), e.to_string()))?;
    let tr = trace_typed(&t, fuel, trace).map_err(|e| Failure::Internal(e.to_string()))?;
    let w = &tr.outcome;
    if json {
        let mut out = outcome_json(&w.outcome);
        out["steps"] = json!(w.steps);
        out["unrolls"] = json!(w.unrolls);
        if trace {
            out["trace"] = tr.steps.iter().map(|(r, t)| json!({ "rule": r.name(), "term": t.to_string() })).collect();
        }
        print_json(&out);
    } else {
        for (rule, t) in &tr.steps {
            println!("{:>10}  {t}", rule.name());
        }
        println!("{}", outcome_line(&w.outcome));
        println!("steps: {}, unrolls: {}", w.steps, w.unrolls);
    }
    Ok(OK)
}

fn cmd_dynamism(lower: &str, upper: &str, json: bool) -> Result<u8, Failure> {
    let a = parse_type(lower).map_err(|e| Failure::Parse("TYPE1".into(), e))?;
    let b = parse_type(upper).map_err(|e| Failure::Parse("TYPE2".into(), e))?;
    let d = check_dynamism(&a, &b);
    if json {
        print_json(&json!({
            "lower": a.to_string(),
            "upper": b.to_string(),
            "related": d.is_some(),
            "derivation": d.as_ref().map(|d| d.to_string()),
        }));
    } else {
        match &d {
            Some(d) => println!("{d}"),
            None => println!("unrelated"),
        }
    }
    Ok(if d.is_some() { OK } else { FAILS })
}

fn cmd_precision(p1: &Path, p2: &Path, json: bool) -> Result<u8, Failure> {
    let t1 = load_gradual(p1)?;
    let t2 = load_gradual(p2)?;
    let res = check_term_dynamism(&Env::new(), &Env::new(), &t1, &t2);
    if json {
        print_json(&match &res {
            Ok((a, b)) => json!({ "related": true, "lower": a.to_string(), "upper": b.to_string() }),
            Err(e) => json!({ "related": false, "reason": e.to_string() }),
        });
    } else {
        match &res {
            Ok((a, b)) => println!("{a} <= {b}"),
            Err(e) => println!("not less dynamic: {e}"),
        }
    }
    Ok(if res.is_ok() { OK } else { FAILS })
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Holds => OK,
        Verdict::Fails { .. } => FAILS,
        Verdict::Inconclusive { .. } => INCONCLUSIVE,
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| Failure::Io(path.display().to_string(), e.to_string()))
}

fn print_comparison(c: &Comparison, json: bool) {
    if json {
        print_json(c);
    } else {
        println!("{}", c.verdict);
        if let Some(w) = c.verdict.witness() {
            for a in &w.arguments {
                println!("  argument: {a}");
            }
        }
        println!("fuel used: {}, samples: {}", c.fuel_used, c.samples);
    }
}

fn cmd_approx(
    p1: &Path,
    p2: &Path,
    cfg: &CompareConfig,
    equiv: bool,
    witness: Option<&Path>,
    json: bool,
) -> Result<u8, Failure> {
    let t1 = load_typed(p1)?;
    let t2 = load_typed(p2)?;
    let c = compare_programs(&t1, &t2, cfg, equiv).map_err(|e| Failure::Type("approx".into(), e.to_string()))?;
    if let (Some(path), Some(w)) = (witness, c.verdict.witness()) {
        write_json(path, w)?;
    }
    print_comparison(&c, json);
    Ok(verdict_code(&c.verdict))
}

fn cmd_props(suite: &str, count: u64, cfg: &GenConfig, dir: &Path, json: bool) -> Result<u8, Failure> {
    let suite: Suite = suite.parse().map_err(|e: lamg_core::suites::UnknownSuite| Failure::Usage(e.to_string()))?;
    let report = run_suite(suite, cfg, count);
    let mut files = Vec::new();
    if !report.failures.is_empty() {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.display().to_string(), e.to_string()))?;
        for f in &report.failures {
            let path = dir.join(format!("{}-{}-{}.json", f.suite, cfg.seed, f.index));
            write_json(&path, f)?;
            files.push(path.display().to_string());
        }
    }
    if json {
        let mut out = serde_json::to_value(&report).expect("serializable");
        out["witness_files"] = json!(files);
        print_json(&out);
    } else {
        println!("{report}");
        for (k, v) in &report.counters {
            println!("  {k}: {v}");
        }
        for (f, path) in report.failures.iter().zip(&files) {
            println!("  case {}: {} ({})", f.index, f.reason, f.summary);
            println!("    replay: lamg replay {path}");
        }
    }
    Ok(if report.fails == 0 { OK } else { FAILS })
}

fn cmd_gen(count: usize, cfg: &GenConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let corpus = gen_corpus(cfg, count);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.display().to_string(), e.to_string()))?;
    }
    for (i, (t, ty)) in corpus.iter().enumerate() {
        let text = format!("# seed {} case {i} : {ty}\n{t}\n", cfg.seed);
        match out {
            Some(dir) => {
                let path = dir.join(format!("gen-{}-{i:04}.lamg", cfg.seed));
                fs::write(&path, text).map_err(|e| Failure::Io(path.display().to_string(), e.to_string()))?;
            }
            None => println!("{text}"),
        }
    }
    Ok(OK)
}

fn cmd_replay(path: &Path, json: bool) -> Result<u8, Failure> {
    let src = read(path)?;
    let bad = |e: serde_json::Error| Failure::Usage(format!("{}: not a witness or failure file: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&src).map_err(bad)?;
    if value.get("suite").is_some() {
        let failure: CaseFailure = serde_json::from_value(value).map_err(bad)?;
        let result = replay_failure(&failure);
        if json {
            print_json(&result);
        } else {
            match &result.verdict {
                CaseVerdict::Fails { reason, .. } => println!("fails: {reason}"),
                v => println!("{}", serde_json::to_value(v).expect("serializable")["verdict"].as_str().unwrap_or("?")),
            }
            println!("case {} of {}: {}", result.index, failure.suite, result.summary);
        }
        return Ok(match result.verdict {
            CaseVerdict::Fails { .. } => FAILS,
            CaseVerdict::Inconclusive { .. } => INCONCLUSIVE,
            _ => OK,
        });
    }
    let witness: Witness = serde_json::from_value(value).map_err(bad)?;
    let c = replay_witness(&witness).map_err(|e| Failure::Usage(e.to_string()))?;
    print_comparison(&c, json);
    Ok(verdict_code(&c.verdict))
}
