//! Semantic guidance for growing refutations. A small model falsifying the
//! root is looked up by enumeration; Refuter then answers every Prover move
//! the way the model does, and the positions met this way are expanded
//! before the local search starts.

use std::collections::{HashMap, HashSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{Position, SearchError, SearchGame};
use crate::calculus::{Member, Rule, Sequent};
use crate::semantics::{EvaluationGame, EvaluationResult, KripkeModel, OpsStrategy, FORALL};
use crate::syntax::{Action, Context, FormulaId, Shape};

const MAX_STATES: usize = 4;
const EXHAUSTIVE_BITS: usize = 14;
const SAMPLES: usize = 2000;
const MAX_VISITS: usize = 200_000;

fn universal_strategy(eg: &EvaluationGame<'_>, res: &EvaluationResult) -> OpsStrategy {
    let game = eg.game();
    let mut f = OpsStrategy::default();
    for v in 0..game.len() {
        let succ = game.successors(v);
        if game.owner(v) != FORALL || succ.is_empty() {
            continue;
        }
        let w = res
            .solution()
            .choice(v)
            .filter(|w| succ.contains(w))
            .unwrap_or(succ[0]);
        f.choice.insert(eg.decode(v), eg.decode(w));
    }
    f
}

fn falsifies(
    eg: &EvaluationGame<'_>,
    res: &EvaluationResult,
    f: &OpsStrategy,
    seq: &Sequent,
    s: usize,
) -> bool {
    seq.members().all(|m| match m {
        Member::Formula(id, _) => !res.holds(id, s),
        Member::Trace(x, y) => !eg.satisfies_trace_atom(f, s, x, y),
        Member::NegTrace(x, y) => eg.satisfies_trace_atom(f, s, x, y),
    })
}

fn model_from_bits(
    names: &[String],
    props: &[String],
    n: usize,
    bit: &mut impl FnMut() -> bool,
) -> KripkeModel {
    let mut m = KripkeModel::with_states(n);
    for name in names {
        let a = Action::new(name);
        for s in 0..n {
            for t in 0..n {
                if bit() {
                    m.add_edge(&a, s, t);
                }
            }
        }
    }
    for p in props {
        for s in 0..n {
            if bit() {
                m.set_true(p, s);
            }
        }
    }
    m
}

/// A model and state at which every member of `root` fails, searched among
/// models with at most four states: exhaustively while the models are few,
/// by seeded sampling otherwise.
pub(crate) fn find_falsifier(ctx: &Context, root: &Sequent) -> Option<(KripkeModel, usize)> {
    let mut names: Vec<String> = ctx.actions().iter().map(|a| a.name().to_string()).collect();
    names.sort();
    names.dedup();
    let props: Vec<String> = ctx.props().iter().map(|p| p.to_string()).collect();
    let mut rng = StdRng::seed_from_u64(0);
    for n in 1..=MAX_STATES {
        let bits = names.len() * n * n + props.len() * n;
        let exhaustive = bits <= EXHAUSTIVE_BITS;
        let count = if exhaustive { 1usize << bits } else { SAMPLES };
        for code in 0..count {
            let mut k = 0;
            let model = if exhaustive {
                model_from_bits(&names, &props, n, &mut || {
                    k += 1;
                    code >> (k - 1) & 1 == 1
                })
            } else {
                model_from_bits(&names, &props, n, &mut || rng.gen_bool(0.4))
            };
            let eg = EvaluationGame::new(ctx, &model);
            let res = eg.solve();
            let candidates: Vec<usize> = (0..n)
                .filter(|&s| root.formulas().iter().all(|&id| !res.holds(id, s)))
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let f = universal_strategy(&eg, &res);
            if let Some(s) = candidates
                .into_iter()
                .find(|&s| falsifies(&eg, &res, &f, root, s))
            {
                return Some((model, s));
            }
        }
    }
    None
}

/// Expands the positions met when Refuter follows `model` from `state`.
/// Prover's moves are all taken; Refuter keeps a false premiss, and a modal
/// step moves to the successor the universal player picks.
pub(crate) fn explore(
    sg: &mut SearchGame,
    model: &KripkeModel,
    state: usize,
) -> Result<(), SearchError> {
    let ctx = sg.context().clone();
    let eg = EvaluationGame::new(&ctx, model);
    let res = eg.solve();
    let f = universal_strategy(&eg, &res);
    let mut atoms: HashMap<(FormulaId, FormulaId, usize), bool> = HashMap::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut stack = vec![(sg.root(), state)];
    while let Some((v, w)) = stack.pop() {
        if seen.len() >= MAX_VISITS {
            break;
        }
        if !seen.insert((v, w)) {
            continue;
        }
        match sg.position(v) {
            Position::Sequent { .. } => {
                if sg.is_frontier(v) {
                    sg.expand(&[v])?;
                }
                stack.extend(sg.game().successors(v).iter().map(|&i| (i, w)));
            }
            Position::Instance { record } => {
                let rec = sg.record(record).clone();
                let succ = sg.game().successors(v).to_vec();
                if succ.is_empty() {
                    continue;
                }
                let (k, next) = match (rec.rule, rec.principal) {
                    (Rule::Cut, Some(Member::Formula(id, _))) => (usize::from(res.holds(id, w)), w),
                    (Rule::Tc, Some(Member::Trace(x, y))) => {
                        let holds = *atoms
                            .entry((x, y, w))
                            .or_insert_with(|| eg.satisfies_trace_atom(&f, w, x, y));
                        (usize::from(holds), w)
                    }
                    (Rule::And, Some(Member::Formula(id, _))) => {
                        let Shape::And(l, r) = ctx.shape(id) else {
                            continue;
                        };
                        let right = match f.choice.get(&(id, w)) {
                            Some(&(c, _)) if !res.holds(id, w) => c == *r && c != *l,
                            _ => res.holds(*l, w),
                        };
                        (usize::from(right), w)
                    }
                    (Rule::Modal, Some(Member::Formula(id, _))) => match f.choice.get(&(id, w)) {
                        Some(&(_, t)) => (0, t),
                        None => continue,
                    },
                    _ => (0, w),
                };
                stack.push((succ[k.min(succ.len() - 1)], next));
            }
        }
    }
    Ok(())
}
