mod common;

use std::collections::BTreeSet;

use common::{check_golden, load_golden};
use lamg_core::gradual::Rule;

#[test]
fn every_golden_trace_matches() {
    let goldens = load_golden();
    assert!(goldens.len() >= 25);
    for g in &goldens {
        let g = g.as_ref().unwrap();
        check_golden(g).unwrap();
    }
}

#[test]
fn golden_corpus_covers_every_cast_rule() {
    let fired: BTreeSet<Rule> = load_golden()
        .into_iter()
        .flat_map(|g| g.unwrap().steps.into_iter().map(|(r, _)| r))
        .collect();
    for rule in Rule::CAST_RULES {
        assert!(fired.contains(&rule), "{rule} never fires");
    }
}
