use std::sync::Arc;

use mu2_core::calculus::Rule;
use mu2_core::corpus::{golden, Expect};
use mu2_core::countermodel::{verified_refute, DEFAULT_DEPTH};
use mu2_core::search::{prove, prove_formula, verify_proof, Mode, Outcome, Proof, SearchConfig};
use mu2_core::syntax::parse_formula;

#[test]
fn golden_corpus_phased() {
    for case in golden() {
        let (ctx, root) = case.context_and_root().unwrap();
        match prove(ctx, &root, SearchConfig::default()).unwrap() {
            Outcome::Proved(p) => {
                assert_eq!(case.expect, Expect::Provable, "{} proved", case.name);
                verify_proof(&p).unwrap();
                assert_eq!(p.root_sequent(), &root);
            }
            Outcome::Refuted(w) => {
                assert_eq!(case.expect, Expect::Refutable, "{} refuted", case.name);
                let cert = verified_refute(&w, DEFAULT_DEPTH).unwrap();
                assert!(cert.is_verified(), "{}", case.name);
            }
        }
    }
}

#[test]
fn zigzag_has_three_inferences() {
    let case = golden()
        .into_iter()
        .find(|c| c.name == "zigzag")
        .unwrap();
    let (ctx, root) = case.context_and_root().unwrap();
    let out = prove(ctx, &root, SearchConfig::default()).unwrap();
    let proof = out.proof().unwrap();
    assert_eq!(proof.nodes.len(), 3);
    for rule in [Rule::Nu, Rule::Modal, Rule::Ax2] {
        assert_eq!(proof.rule_count(rule), 1, "{rule}");
    }
}

#[test]
fn zigzag_as_implication() {
    let phi = parse_formula("~(<a>p) | nu x.<a><a'>x").unwrap();
    let out = prove_formula(&phi, SearchConfig::default()).unwrap();
    verify_proof(out.proof().expect("valid")).unwrap();
    // the converse fails on an a-loop without p
    let converse = parse_formula("<a>p | ~(nu x.<a><a'>x)").unwrap();
    assert!(prove_formula(&converse, SearchConfig::default())
        .unwrap()
        .proof()
        .is_none());
}

#[test]
fn proof_json_round_trip() {
    let phi = parse_formula("~p | nu y.([a]y & mu x.(<a'>x | p))").unwrap();
    let out = prove_formula(&phi, SearchConfig::default()).unwrap();
    let proof = out.proof().unwrap();
    let text = serde_json::to_string(&proof.to_json()).unwrap();
    let back = Proof::from_json(&text).unwrap();
    verify_proof(&back).unwrap();
    assert_eq!(back.nodes.len(), proof.nodes.len());
    assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
}

#[test]
fn tampered_proof_is_rejected() {
    let phi = parse_formula("nu x. [a]x").unwrap();
    let out = prove_formula(&phi, SearchConfig::default()).unwrap();
    let json = out.proof().unwrap().to_json();
    let bud = json["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .position(|n| !n["backedge"].is_null())
        .expect("a cyclic proof");

    let mut open_leaf = json.clone();
    open_leaf["nodes"][bud]["backedge"] = serde_json::Value::Null;
    let p = Proof::from_json(&open_leaf.to_string()).unwrap();
    assert!(verify_proof(&p).is_err());

    let mut wrong_rule = json.clone();
    wrong_rule["nodes"][0]["rule"] = "R_mu".into();
    if let Ok(p) = Proof::from_json(&wrong_rule.to_string()) {
        assert!(verify_proof(&p).is_err());
    }
}

#[test]
fn full_and_phased_agree_on_small_cases() {
    for case in golden().into_iter().filter(|c| c.small) {
        let (ctx, root) = case.context_and_root().unwrap();
        let phased = prove(Arc::clone(&ctx), &root, SearchConfig::default()).unwrap();
        let full = prove(
            ctx,
            &root,
            SearchConfig {
                max_positions: 300_000,
                ..SearchConfig::with_mode(Mode::Full)
            },
        )
        .unwrap();
        assert_eq!(
            phased.proof().is_some(),
            full.proof().is_some(),
            "{}",
            case.name
        );
        if let Some(p) = full.proof() {
            verify_proof(p).unwrap();
        }
    }
}
