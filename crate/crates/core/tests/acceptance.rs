//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! lines are always printed.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mu2_core::calculus::{
    context_for, intern_sequent, parse_sequent, Calculus, Member, Rule, Sequent, TraceScope,
};
use mu2_core::corpus::{
    golden, random_formula, random_game, random_model, random_sequent, Expect, FormulaShape,
};
use mu2_core::countermodel::{verified_refute, CountermodelCertificate};
use mu2_core::paritygames::{brute_force_winner, solve, ParityGame, BRUTE_FORCE_BOUND};
use mu2_core::search::{
    instance_priority, prove, verify_proof, Outcome, SearchConfig, PROVER, REFUTER,
};
use mu2_core::semantics::{fixpoint_oracle, model_check, truth_table, EvaluationGame, KripkeModel};
use mu2_core::syntax::{parse_formula, Context};

const BACK_TO_P: &str = "~p [f], nu y.([a]y & mu x.(<a'>x | p)) [f]";
const ZIGZAG: &str = "[a]~p [f], nu x.<a><a'>x [f]";
const TIME_LIMIT: Duration = Duration::from_secs(10);
const SEED: u64 = 20240;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn setup(text: &str) -> (Arc<Context>, Sequent) {
    let raw = parse_sequent(text).unwrap();
    let ctx = Arc::new(context_for(&raw).unwrap());
    let root = intern_sequent(&ctx, &raw).unwrap();
    (ctx, root)
}

fn seq(ctx: &Context, text: &str) -> Sequent {
    intern_sequent(ctx, &parse_sequent(text).unwrap()).unwrap()
}

fn id(ctx: &Context, text: &str) -> mu2_core::FormulaId {
    ctx.id_of(&parse_formula(text).unwrap()).unwrap()
}

fn golden_proofs() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, text) in [("back-to-p", BACK_TO_P), ("zigzag", ZIGZAG)] {
        let (ctx, root) = setup(text);
        let t = Instant::now();
        let out = prove(ctx, &root, SearchConfig::default()).unwrap();
        let elapsed = t.elapsed();
        let good = match out.proof() {
            Some(p) => verify_proof(p).is_ok() && p.root_sequent() == &root,
            None => false,
        };
        ok &= good && elapsed < TIME_LIMIT;
        notes.push(format!(
            "{name}: {} in {:.3}s",
            if good {
                "verified proof"
            } else {
                "no verified proof"
            },
            elapsed.as_secs_f64()
        ));
    }
    verdict(ok, format!("{} (limit 10s each)", notes.join(", ")))
}

fn jump_fidelity() -> Verdict {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    // back-to-p, without trace atoms
    let (ctx, _) = setup(BACK_TO_P);
    let calc = Calculus::new(&ctx, TraceScope::All);
    let psi = "nu y.([a]y & mu x.(<a'>x | p))";
    let phi = "mu x.(<a'>x | p)";
    let steps = [
        (
            format!("~p [f], [a]{psi} [f], ~{phi} [u]"),
            format!("[a]{psi}"),
            format!("{psi} [f], [a']~{phi} [u]"),
        ),
        (
            format!("[a]{psi} [f], [a']~{phi} [u], ~{phi} [u]"),
            format!("[a]{psi}"),
            format!("{psi} [f], [a']~{phi} [u]"),
        ),
        (
            format!("[a]{psi} [f], [a']~{phi} [u], <a'>{phi} [u], p [u]"),
            format!("[a']~{phi}"),
            format!("~{phi} [u], {phi} [u]"),
        ),
        (
            format!("<a'>{phi} [u], p [u], [a']~{phi} [u]"),
            format!("[a']~{phi}"),
            format!("{phi} [u], ~{phi} [u]"),
        ),
    ];
    for (conclusion, principal, premiss) in &steps {
        let conclusion = seq(&ctx, conclusion);
        let principal = id(&ctx, principal);
        let b = calc.s_value(principal, &conclusion);
        let side = conclusion.without(Member::Formula(principal, b));
        let got = calc.jump(&side, &conclusion, principal).unwrap();
        checked += 1;
        if got != seq(&ctx, premiss) {
            mismatches.push(format!("back-to-p: got {}", got.display(&ctx)));
        }
    }
    // zigzag, read off the extracted proof
    let (ctx, root) = setup(ZIGZAG);
    let out = prove(ctx.clone(), &root, SearchConfig::default()).unwrap();
    let proof = out.proof().expect("zigzag is provable");
    let phi = "nu x.<a><a'>x";
    let expected = seq(
        &ctx,
        &format!(
            "~p [f], <a'>({phi}) [f], <a'>({phi}) !~> <a'>({phi}), <a'>({phi}) ~> <a'>({phi})"
        ),
    );
    let modal: Vec<_> = proof
        .nodes
        .iter()
        .filter(|n| n.inference.as_ref().is_some_and(|i| i.rule == Rule::Modal))
        .collect();
    for node in &modal {
        checked += 1;
        let premiss = &proof.nodes[node.children[0]].sequent;
        if premiss != &expected {
            mismatches.push(format!("zigzag: got {}", premiss.display(&ctx)));
        }
    }
    if modal.len() != 1 {
        mismatches.push(format!("zigzag: {} modal steps", modal.len()));
    }
    let ok = mismatches.is_empty();
    let detail = if ok {
        format!("{checked} modal premisses equal the worked ones exactly")
    } else {
        mismatches.join("; ")
    };
    verdict(ok, detail)
}

fn solver_oracle(rng: &mut StdRng) -> Verdict {
    let cases = 500;
    let mut differ = 0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=8);
        let g = random_game(rng, n, 2);
        let expected = brute_force_winner(&g, BRUTE_FORCE_BOUND).unwrap();
        if solve(&g).winners() != &expected[..] {
            differ += 1;
        }
    }
    verdict(
        differ == 0,
        format!("{cases} games (<= 8 positions, priorities 0..2), {differ} mismatches"),
    )
}

fn model_checker_oracle(rng: &mut StdRng) -> Verdict {
    let cases = 200;
    let shape = FormulaShape::default();
    let mut differ = 0;
    let mut largest = 0;
    for _ in 0..cases {
        let phi = random_formula(rng, &shape);
        largest = largest.max(Context::new([phi.clone()]).unwrap().len());
        let n = rng.gen_range(1..=5);
        let m = random_model(rng, n, &shape.props, &shape.actions, 0.3);
        let denotation = fixpoint_oracle(&m, &phi);
        for s in 0..n {
            if model_check(&m, s, &phi).unwrap() != denotation.contains(&s) {
                differ += 1;
            }
        }
    }
    verdict(
        differ == 0,
        format!("{cases} pairs (<= 5 states, closure <= {largest}), {differ} disagreements"),
    )
}

/// Random trace-atom-free sequents, split by outcome.
struct RandomCorpus {
    proved: Vec<(Arc<Context>, Sequent)>,
    refuted: Vec<(String, Box<mu2_core::RefuterWitness>)>,
    rejected: Vec<String>,
    undecided: usize,
}

fn random_corpus(rng: &mut StdRng, want_proved: usize, max_attempts: usize) -> RandomCorpus {
    let shape = FormulaShape {
        depth: 3,
        max_context: 14,
        ..FormulaShape::default()
    };
    let config = SearchConfig {
        max_positions: 300_000,
        ..SearchConfig::default()
    };
    let mut corpus = RandomCorpus {
        proved: Vec::new(),
        refuted: Vec::new(),
        rejected: Vec::new(),
        undecided: 0,
    };
    for _ in 0..max_attempts {
        if corpus.proved.len() >= want_proved {
            break;
        }
        let (ctx, root) = random_sequent(rng, &shape, 2).unwrap();
        match prove(ctx.clone(), &root, config) {
            Ok(Outcome::Proved(p)) => match verify_proof(&p) {
                Ok(()) => corpus.proved.push((ctx, root)),
                Err(defects) => {
                    corpus
                        .rejected
                        .push(format!("{}: {}", root.display(&ctx), defects[0]))
                }
            },
            Ok(Outcome::Refuted(w)) => corpus.refuted.push((root.display(&ctx), w)),
            Err(_) => corpus.undecided += 1,
        }
    }
    corpus
}

fn soundness(rng: &mut StdRng, corpus: &RandomCorpus) -> Verdict {
    let props: Vec<String> = vec!["p".into(), "q".into()];
    let actions: Vec<String> = vec!["a".into()];
    let mut counterexamples = 0;
    for (ctx, root) in &corpus.proved {
        for _ in 0..20 {
            let n = rng.gen_range(1..=4);
            let m = random_model(rng, n, &props, &actions, 0.35);
            let table = truth_table(ctx, &m);
            let formulas = root.formulas();
            for s in 0..n {
                if !formulas.iter().any(|f| table[f].contains(&s)) {
                    counterexamples += 1;
                }
            }
        }
    }
    let ok = corpus.proved.len() >= 100 && counterexamples == 0 && corpus.rejected.is_empty();
    let mut detail = format!(
        "{} proved sequents x 20 models, {counterexamples} counterexamples, {} proofs rejected by the checker",
        corpus.proved.len(),
        corpus.rejected.len()
    );
    for r in &corpus.rejected {
        detail.push_str(&format!("; {r}"));
    }
    verdict(ok, detail)
}

fn refutations(corpus: &RandomCorpus) -> (Verdict, Vec<CountermodelCertificate>) {
    let mut certificates = Vec::new();
    let mut unverified = Vec::new();
    let mut witnesses: Vec<(String, Box<mu2_core::RefuterWitness>)> = Vec::new();
    for case in golden()
        .into_iter()
        .filter(|c| c.expect == Expect::Refutable)
    {
        let (ctx, root) = case.context_and_root().unwrap();
        match prove(ctx, &root, SearchConfig::default()).unwrap() {
            Outcome::Refuted(w) => witnesses.push((case.name.to_string(), w)),
            Outcome::Proved(_) => unverified.push(format!("{}: proved", case.name)),
        }
    }
    let mut max_depth = 0;
    for (name, w) in witnesses.iter().chain(corpus.refuted.iter()) {
        match verified_refute(w, 8) {
            Ok(cert) => {
                let reverified = cert
                    .falsified
                    .iter()
                    .all(|phi| !fixpoint_oracle(&cert.model, phi).contains(&cert.root));
                if reverified && cert.is_verified() {
                    max_depth = max_depth.max(cert.depth);
                    certificates.push(cert);
                } else {
                    unverified.push(format!("{name}: oracle disagrees"));
                }
            }
            Err(e) => unverified.push(format!("{name}: {e}")),
        }
    }
    let total = witnesses.len() + corpus.refuted.len();
    let mut detail = format!(
        "{} of {total} refutations certified (max depth {max_depth}), {} unverified",
        certificates.len(),
        unverified.len()
    );
    for u in &unverified {
        detail.push_str(&format!("; {u}"));
    }
    (verdict(unverified.is_empty(), detail), certificates)
}

fn saturation(certificates: &[CountermodelCertificate]) -> Verdict {
    let violations: usize = certificates
        .iter()
        .map(|c| c.diagnostics.saturation.len())
        .sum();
    let lemma: usize = certificates
        .iter()
        .map(|c| c.diagnostics.lemmas.in_eval.len() + c.diagnostics.lemmas.loops.len())
        .sum();
    let states: usize = certificates.iter().map(|c| c.diagnostics.states).sum();
    verdict(
        violations == 0 && lemma == 0,
        format!("{states} states over {} certificates, {violations} saturation violations, {lemma} lemma violations", certificates.len()),
    )
}

fn non_strong_validity() -> Verdict {
    let (ctx, _) = setup("p & q, p, q");
    let conj = id(&ctx, "p & q");
    let members = [(conj, id(&ctx, "p")), (conj, id(&ctx, "q"))];
    let mut m = KripkeModel::with_states(2);
    m.set_true("p", 0);
    m.set_true("q", 1);
    let eg = EvaluationGame::new(&ctx, &m);
    let ops = eg.enumerate_ops(1 << 12).unwrap();
    let mut sequent_fails = 0;
    let mut always: Vec<bool> = vec![true; members.len()];
    for f in &ops {
        for s in 0..m.len() {
            let holds: Vec<bool> = members
                .iter()
                .map(|&(x, y)| eg.satisfies_trace_atom(f, s, x, y))
                .collect();
            if !holds.iter().any(|&h| h) {
                sequent_fails += 1;
            }
            for (k, h) in holds.iter().enumerate() {
                always[k] &= *h;
            }
        }
    }
    let ok = !ops.is_empty() && sequent_fails == 0 && always.iter().all(|&a| !a);
    verdict(
        ok,
        format!(
            "{} ops on 2 states: sequent fails {sequent_fails} times, members holding under every ops: {}",
            ops.len(),
            always.iter().filter(|&&a| a).count()
        ),
    )
}

/// Winner of the single play that runs through `stem` once and then around
/// `cycle` forever, each step a sequent and the rule applied to it.
fn lasso_winner(stem: &[(Sequent, Rule)], cycle: &[(Sequent, Rule)]) -> mu2_core::Player {
    let mut g = ParityGame::new();
    let mut chain = Vec::new();
    for (gamma, rule) in stem.iter().chain(cycle) {
        chain.push(g.add_position(PROVER, 0));
        chain.push(g.add_position(REFUTER, instance_priority(gamma, *rule)));
    }
    for w in chain.windows(2) {
        g.add_edge(w[0], w[1]);
    }
    g.add_edge(*chain.last().unwrap(), chain[2 * stem.len()]);
    solve(&g).winner(0)
}

fn priorities() -> Verdict {
    let (ctx, _) = setup("p, q, [a]p");
    let focused = seq(&ctx, "[a]p [f], q [u]");
    let unfocused = seq(&ctx, "[a]p [u], q [u]");
    let mut fails = Vec::new();
    let omega = [
        (instance_priority(&unfocused, Rule::Cut), 3),
        (instance_priority(&focused, Rule::Modal), 2),
        (instance_priority(&focused, Rule::Or), 1),
    ];
    for (k, (got, want)) in omega.iter().enumerate() {
        if got != want {
            fails.push(format!("omega case {k}: {got} != {want}"));
        }
    }
    let f = |r| (focused.clone(), r);
    let u = |r| (unfocused.clone(), r);
    type Steps = Vec<(Sequent, Rule)>;
    let lassos: Vec<(Steps, Steps)> = vec![
        (vec![], vec![f(Rule::Nu), f(Rule::Modal)]),
        (vec![], vec![f(Rule::Nu), f(Rule::Cut)]),
        (vec![], vec![f(Rule::Modal), u(Rule::Focus)]),
        (vec![], vec![u(Rule::Cut), u(Rule::Focus)]),
        (
            vec![u(Rule::Focus), u(Rule::Cut)],
            vec![f(Rule::Modal), f(Rule::And)],
        ),
        (
            vec![f(Rule::Modal), f(Rule::Modal)],
            vec![f(Rule::Mu), f(Rule::Cut)],
        ),
    ];
    for (k, (stem, cycle)) in lassos.iter().enumerate() {
        // the prose condition: every sequent on the cycle has a focused
        // member and the cycle applies the modal rule
        let prose = cycle.iter().all(|(g, _)| g.has_focus())
            && cycle.iter().any(|(_, r)| *r == Rule::Modal);
        let expected = if prose { PROVER } else { REFUTER };
        if lasso_winner(stem, cycle) != expected {
            fails.push(format!("lasso {k}"));
        }
    }
    let ok = fails.is_empty();
    let detail = if ok {
        "3 priority cases and 6 lassos agree with the winning condition".to_string()
    } else {
        fails.join(", ")
    };
    verdict(ok, detail)
}

fn main() {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "golden provability", golden_proofs()),
        (2, "jump fidelity", jump_fidelity()),
        (3, "parity solver oracle", solver_oracle(&mut rng)),
        (4, "model checker oracle", model_checker_oracle(&mut rng)),
    ];
    let corpus = random_corpus(&mut rng, 100, 2000);
    results.push((5, "soundness", soundness(&mut rng, &corpus)));
    let (refuted, certificates) = refutations(&corpus);
    results.push((6, "refutation verification", refuted));
    results.push((7, "saturation", saturation(&certificates)));
    results.push((8, "non-strong validity", non_strong_validity()));
    results.push((9, "priority encoding", priorities()));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, v) in &results {
        println!(
            "criterion {n} [{name}]: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed += 1;
        }
    }
    if corpus.undecided > 0 {
        println!(
            "note: {} random sequents undecided within 300000 positions",
            corpus.undecided
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
