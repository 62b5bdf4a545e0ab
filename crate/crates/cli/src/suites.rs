//! The suites behind `mu2 corpus run`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use mu2_core::corpus::{golden, random_game, random_model, random_sequent, Expect, FormulaShape};
use mu2_core::countermodel::{verified_refute, DEFAULT_DEPTH};
use mu2_core::paritygames::{brute_force_winner, solve, BRUTE_FORCE_BOUND};
use mu2_core::search::{prove, verify_proof, Outcome, SearchConfig, SearchError};
use mu2_core::semantics::{fixpoint_oracle, model_check, truth_table};

/// Budget for random sequents; larger ones are reported as undecided.
const RANDOM_BUDGET: usize = 300_000;

#[derive(Debug, Default, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub undecided: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            ..Default::default()
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(what());
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.failures.is_empty())
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.suites {
            let verdict = if s.failures.is_empty() {
                "ok"
            } else {
                "FAILED"
            };
            out.push(format!(
                "{:<12} {verdict:<6} passed={} failed={} undecided={}",
                s.name,
                s.passed,
                s.failures.len(),
                s.undecided
            ));
            for f in &s.failures {
                out.push(format!("  {f}"));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn golden_suite() -> SuiteResult {
    let mut r = SuiteResult::new("golden");
    for case in golden() {
        let (ctx, root) = match case.context_and_root() {
            Ok(x) => x,
            Err(e) => {
                r.failures.push(format!("{}: {e}", case.name));
                continue;
            }
        };
        match prove(ctx, &root, SearchConfig::default()) {
            Ok(Outcome::Proved(p)) => r.check(
                case.expect == Expect::Provable && verify_proof(&p).is_ok(),
                || format!("{}: proved, expected {:?}", case.name, case.expect),
            ),
            Ok(Outcome::Refuted(w)) => {
                let cert = verified_refute(&w, DEFAULT_DEPTH);
                let ok = case.expect == Expect::Refutable
                    && cert.as_ref().is_ok_and(|c| c.is_verified());
                r.check(ok, || match cert {
                    Ok(_) => format!("{}: refuted, expected {:?}", case.name, case.expect),
                    Err(e) => format!("{}: {e}", case.name),
                })
            }
            Err(e) => r.failures.push(format!("{}: {e}", case.name)),
        }
    }
    r
}

fn games_suite(rng: &mut StdRng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("games");
    for k in 0..cases {
        let n = rng.gen_range(1..=BRUTE_FORCE_BOUND.min(8));
        let g = random_game(rng, n, 2);
        let expected = brute_force_winner(&g, BRUTE_FORCE_BOUND).expect("within bound");
        r.check(solve(&g).winners() == &expected[..], || {
            format!("game {k}: regions differ")
        });
    }
    r
}

fn modelcheck_suite(rng: &mut StdRng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("modelcheck");
    let shape = FormulaShape::default();
    for k in 0..cases {
        let phi = mu2_core::corpus::random_formula(rng, &shape);
        let n = rng.gen_range(1..=5);
        let m = random_model(rng, n, &shape.props, &shape.actions, 0.3);
        let denotation = fixpoint_oracle(&m, &phi);
        let agree =
            (0..n).all(|s| model_check(&m, s, &phi).is_ok_and(|h| h == denotation.contains(&s)));
        r.check(agree, || format!("case {k}: {phi}"));
    }
    r
}

fn soundness_suite(rng: &mut StdRng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("random");
    let shape = FormulaShape {
        depth: 3,
        max_context: 12,
        ..FormulaShape::default()
    };
    let config = SearchConfig {
        max_positions: RANDOM_BUDGET,
        ..SearchConfig::default()
    };
    for k in 0..cases {
        let (ctx, root) = random_sequent(rng, &shape, 2).expect("generated sequent is well formed");
        let text = root.display(&ctx);
        match prove(ctx.clone(), &root, config) {
            Ok(Outcome::Proved(p)) => {
                let mut ok = verify_proof(&p).is_ok();
                for _ in 0..5 {
                    let n = rng.gen_range(1..=4);
                    let m = random_model(rng, n, &shape.props, &shape.actions, 0.3);
                    let table = truth_table(&ctx, &m);
                    ok &= (0..n).all(|s| root.formulas().iter().any(|id| table[id].contains(&s)));
                }
                r.check(ok, || format!("case {k}: {text} proved but not valid"));
            }
            Ok(Outcome::Refuted(w)) => {
                let cert = verified_refute(&w, DEFAULT_DEPTH);
                r.check(cert.is_ok_and(|c| c.is_verified()), || {
                    format!("case {k}: {text} refuted without certificate")
                });
            }
            Err(SearchError::Budget(_)) => r.undecided += 1,
            Err(e) => r.failures.push(format!("case {k}: {e}")),
        }
    }
    r
}

pub fn run_all(seed: u64, cases: usize) -> Report {
    let mut rng = StdRng::seed_from_u64(seed);
    let suites = vec![
        golden_suite(),
        games_suite(&mut rng, cases),
        modelcheck_suite(&mut rng, cases),
        soundness_suite(&mut rng, cases),
    ];
    Report { seed, suites }
}
