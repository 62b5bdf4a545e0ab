//! Countermodels read off Refuter's winning strategy in the phased search
//! game. States are the modal-free stretches of the strategy; the finite
//! candidate obtained by merging equal stretches is accepted only after the
//! model checker confirms that it falsifies the root.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{Annotation, Calculus, Member, Rule, Sequent, TraceScope};
use crate::search::{GameKind, Phase, Position, RefuterWitness};
use crate::semantics::{fixpoint_oracle, model_check, KripkeModel, OpsStrategy, SemanticsError};
use crate::syntax::{Action, Context, FormulaId, Shape};

/// Upper bound on the number of states of an unravelling.
pub const MAX_TREE_STATES: usize = 20_000;

/// Default cap on the modal depth tried by [`verified_refute`].
pub const DEFAULT_DEPTH: usize = 8;

#[derive(Debug, Error)]
pub enum CountermodelError {
    #[error("countermodels are only read off the phased game, not the {0} game")]
    NotPhased(GameKind),
    #[error("position {0} is not won by Refuter")]
    NotWon(usize),
    #[error("strategy breaks off at position {0}")]
    Broken(usize),
    #[error("modal-free stretch from position {0} does not end")]
    Cycle(usize),
    #[error("no choice for the universal player at {formula} in state {state}")]
    MissingWitness { formula: String, state: usize },
    #[error("refutation unverified at depth {depth}")]
    Unverified { depth: usize },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// A modal step at the end of a segment.
#[derive(Clone, Debug)]
pub struct ModalEdge {
    pub action: Action,
    pub principal: FormulaId,
    pub annotation: Annotation,
    /// Start position of the segment above.
    pub target: usize,
}

/// A maximal modal-free path of the strategy: Prover positions in order,
/// with the union of their sequents.
#[derive(Clone, Debug)]
pub struct Segment {
    pub start: usize,
    pub positions: Vec<usize>,
    pub label: Sequent,
    pub focus_applied: bool,
    pub modal: Vec<ModalEdge>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Refuter's strategy with all of Prover's phased moves, cut into segments.
pub struct StrategyGraph<'a> {
    witness: &'a RefuterWitness,
    segments: Vec<Segment>,
    index: HashMap<usize, usize>,
}

impl<'a> StrategyGraph<'a> {
    /// Segments reachable from the root of the witness.
    pub fn new(witness: &'a RefuterWitness) -> Result<Self, CountermodelError> {
        let kind = witness.search.kind();
        if kind != GameKind::Phased {
            return Err(CountermodelError::NotPhased(kind));
        }
        let mut sg = StrategyGraph {
            witness,
            segments: Vec::new(),
            index: HashMap::new(),
        };
        let mut queue = VecDeque::from([witness.search.root()]);
        while let Some(start) = queue.pop_front() {
            if sg.index.contains_key(&start) {
                continue;
            }
            let seg = sg.walk(start)?;
            queue.extend(seg.modal.iter().map(|e| e.target));
            sg.index.insert(start, sg.segments.len());
            sg.segments.push(seg);
        }
        Ok(sg)
    }

    fn walk(&self, start: usize) -> Result<Segment, CountermodelError> {
        let search = &self.witness.search;
        let game = search.game();
        let mut label = Sequent::empty(search.context());
        let mut positions = Vec::new();
        let mut seen = HashSet::new();
        let mut focus_applied = false;
        let mut v = start;
        loop {
            if !self.witness.wins(v) {
                return Err(CountermodelError::NotWon(v));
            }
            if !seen.insert(v) {
                return Err(CountermodelError::Cycle(start));
            }
            positions.push(v);
            label = label.union(search.sequent_at(v));
            let Position::Sequent { phase, .. } = search.position(v) else {
                return Err(CountermodelError::Broken(v));
            };
            let succ = game.successors(v);
            if phase == Phase::Modal {
                let mut modal = Vec::new();
                for &i in succ {
                    let rec = search.record_at(i).ok_or(CountermodelError::Broken(i))?;
                    let (Some(Member::Formula(principal, annotation)), Some(action)) =
                        (rec.principal, rec.action.clone())
                    else {
                        return Err(CountermodelError::Broken(i));
                    };
                    let &[target] = game.successors(i) else {
                        return Err(CountermodelError::Broken(i));
                    };
                    modal.push(ModalEdge {
                        action,
                        principal,
                        annotation,
                        target,
                    });
                }
                return Ok(Segment {
                    start,
                    positions,
                    label,
                    focus_applied,
                    modal,
                });
            }
            let &[i] = succ else {
                return Err(CountermodelError::Broken(v));
            };
            let rec = search.record_at(i).ok_or(CountermodelError::Broken(i))?;
            focus_applied |= rec.rule == Rule::Focus;
            v = match game.successors(i) {
                [] => return Err(CountermodelError::Broken(i)),
                [only] => *only,
                _ => self.witness.choice(i).ok_or(CountermodelError::Broken(i))?,
            };
        }
    }

    pub fn witness(&self) -> &RefuterWitness {
        self.witness
    }

    pub fn context(&self) -> &Context {
        self.witness.search.context()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, i: usize) -> &Segment {
        &self.segments[i]
    }

    /// Segment starting at a game position.
    pub fn segment_at(&self, start: usize) -> Option<usize> {
        self.index.get(&start).copied()
    }

    pub fn root_segment(&self) -> usize {
        0
    }

    /// The sequent at the root of the search game.
    pub fn root_sequent(&self) -> &Sequent {
        self.witness.search.sequent_at(self.witness.search.root())
    }
}

/// A state of the unravelled strategy.
#[derive(Clone, Debug)]
pub struct ModelState {
    pub segment: usize,
    pub parent: Option<usize>,
    pub incoming: Option<Action>,
    pub depth: usize,
    /// Index into the segment's modal edges, and the state above.
    pub children: Vec<(usize, usize)>,
    /// The modal steps of the segment were cut off by the depth bound.
    pub truncated: bool,
}

/// The unravelling of a strategy graph to a modal depth. State 0 is the
/// root.
#[derive(Clone, Debug)]
pub struct Forest {
    pub states: Vec<ModelState>,
    pub depth: usize,
}

/// Unravels `sg` breadth-first up to `depth` modal steps and at most
/// [`MAX_TREE_STATES`] states.
pub fn build_states(sg: &StrategyGraph<'_>, depth: usize) -> Forest {
    let mut states = vec![ModelState {
        segment: sg.root_segment(),
        parent: None,
        incoming: None,
        depth: 0,
        children: Vec::new(),
        truncated: false,
    }];
    let mut k = 0;
    while k < states.len() {
        let seg = sg.segment(states[k].segment);
        if seg.modal.is_empty() {
            k += 1;
            continue;
        }
        if states[k].depth >= depth || states.len() + seg.modal.len() > MAX_TREE_STATES {
            states[k].truncated = true;
            k += 1;
            continue;
        }
        for (e, edge) in seg.modal.iter().enumerate() {
            let child = states.len();
            states.push(ModelState {
                segment: sg.segment_at(edge.target).expect("targets are walked"),
                parent: Some(k),
                incoming: Some(edge.action.clone()),
                depth: states[k].depth + 1,
                children: Vec::new(),
                truncated: false,
            });
            states[k].children.push((e, child));
        }
        k += 1;
    }
    Forest { states, depth }
}

/// A finite model whose states carry segments, with the modal steps that
/// justify the universal player's box moves.
#[derive(Clone, Debug)]
pub struct Structure {
    pub model: KripkeModel,
    pub root: usize,
    pub segment_of: Vec<usize>,
    /// Per state: (principal box, state above).
    pub modal: Vec<Vec<(FormulaId, usize)>>,
    pub truncated: Vec<bool>,
}

fn valuation(ctx: &Context, model: &mut KripkeModel, state: usize, label: &Sequent) {
    let have: HashSet<FormulaId> = label.formulas().into_iter().collect();
    for id in ctx.ids() {
        if let Shape::NegProp(p) = ctx.shape(id) {
            if have.contains(&id) {
                model.set_true(p, state);
            }
        }
    }
}

impl Structure {
    /// The unravelling itself as a model.
    pub fn tree(sg: &StrategyGraph<'_>, forest: &Forest) -> Structure {
        let n = forest.states.len();
        let mut model =
            KripkeModel::named((0..n).map(|i| format!("t{i}")).collect()).expect("distinct names");
        let mut modal = vec![Vec::new(); n];
        for (s, st) in forest.states.iter().enumerate() {
            let seg = sg.segment(st.segment);
            valuation(sg.context(), &mut model, s, &seg.label);
            for &(e, child) in &st.children {
                let edge = &seg.modal[e];
                model.add_edge(&edge.action, s, child);
                modal[s].push((edge.principal, child));
            }
        }
        Structure {
            model,
            root: 0,
            segment_of: forest.states.iter().map(|s| s.segment).collect(),
            modal,
            truncated: forest.states.iter().map(|s| s.truncated).collect(),
        }
    }

    /// Merges states with equal segment and incoming action. Modal steps
    /// cut off by the depth bound are redirected to an existing class when
    /// there is one.
    pub fn quotient(sg: &StrategyGraph<'_>, forest: &Forest) -> Structure {
        let mut classes: BTreeMap<(usize, Option<Action>), usize> = BTreeMap::new();
        let mut keys = Vec::new();
        let mut class_of = Vec::with_capacity(forest.states.len());
        for st in &forest.states {
            let key = (st.segment, st.incoming.clone());
            let next = classes.len();
            let c = *classes.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                next
            });
            class_of.push(c);
        }
        let n = keys.len();
        let mut model =
            KripkeModel::named((0..n).map(|i| format!("s{i}")).collect()).expect("distinct names");
        let mut modal: Vec<BTreeMap<(FormulaId, usize), ()>> = vec![BTreeMap::new(); n];
        let mut truncated = vec![false; n];
        let mut expanded = vec![false; n];
        for (c, (seg, _)) in keys.iter().enumerate() {
            valuation(sg.context(), &mut model, c, &sg.segment(*seg).label);
        }
        for (s, st) in forest.states.iter().enumerate() {
            let c = class_of[s];
            let seg = sg.segment(st.segment);
            if st.truncated {
                for edge in &seg.modal {
                    let target = sg.segment_at(edge.target).expect("targets are walked");
                    match classes.get(&(target, Some(edge.action.clone()))) {
                        Some(&d) => {
                            model.add_edge(&edge.action, c, d);
                            modal[c].insert((edge.principal, d), ());
                        }
                        None => truncated[c] = true,
                    }
                }
            } else {
                expanded[c] = true;
                for &(e, child) in &st.children {
                    let edge = &seg.modal[e];
                    let d = class_of[child];
                    model.add_edge(&edge.action, c, d);
                    modal[c].insert((edge.principal, d), ());
                }
            }
        }
        for c in 0..n {
            if expanded[c] {
                truncated[c] = false;
            }
        }
        Structure {
            model,
            root: class_of[0],
            segment_of: keys.iter().map(|k| k.0).collect(),
            modal: modal.into_iter().map(|m| m.into_keys().collect()).collect(),
            truncated,
        }
    }

    pub fn label<'s>(&self, sg: &'s StrategyGraph<'_>, state: usize) -> &'s Sequent {
        &sg.segment(self.segment_of[state]).label
    }
}

/// A violated condition of the saturation lemma, numbered 1 to 10 in the
/// lemma's order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub bullet: u8,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bullet {}: {}", self.bullet, self.detail)
    }
}

/// Checks the ten saturation conditions, the trace-atom condition over all
/// pairs of the context.
pub fn saturation_check(ctx: &Context, label: &Sequent) -> Vec<Violation> {
    let pairs = Calculus::new(ctx, TraceScope::All).tc_pairs().to_vec();
    saturation_check_pairs(ctx, label, &pairs)
}

/// Saturation with the trace-atom condition restricted to `pairs`.
pub fn saturation_check_pairs(
    ctx: &Context,
    label: &Sequent,
    pairs: &[(FormulaId, FormulaId)],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut fail = |bullet: u8, detail: String| out.push(Violation { bullet, detail });
    let show = |id: FormulaId| ctx.display(id);
    let has = |id: FormulaId| label.has_formula(id);
    let u = |id: FormulaId| label.contains(Member::Formula(id, Annotation::U));
    let tr = |x: FormulaId, y: FormulaId| label.contains(Member::Trace(x, y));
    let ntr = |x: FormulaId, y: FormulaId| label.contains(Member::NegTrace(x, y));
    for id in ctx.ids() {
        let neg = ctx.negation(id);
        if id < neg && has(id) && has(neg) {
            fail(1, format!("{} and its negation", show(id)));
        }
        if id < neg && u(id) == u(neg) {
            fail(
                2,
                format!(
                    "{}^u and {}^u are both {}",
                    show(id),
                    show(neg),
                    if u(id) { "present" } else { "absent" }
                ),
            );
        }
    }
    for &(x, y) in pairs {
        if tr(x, y) == ntr(x, y) {
            fail(
                3,
                format!(
                    "({}, {}) has {} trace atoms",
                    show(x),
                    show(y),
                    if tr(x, y) { "both" } else { "no" }
                ),
            );
        }
    }
    for m in label.members() {
        if let Member::Trace(x, y) = m {
            if x == y {
                fail(4, format!("{} ~> itself", show(x)));
            }
        }
    }
    for id in label.formulas() {
        match ctx.shape(id) {
            Shape::Or(l, r) => {
                for &c in &[*l, *r] {
                    if !(ntr(id, c) && has(c)) {
                        fail(5, format!("{} lacks disjunct {}", show(id), show(c)));
                    }
                }
            }
            Shape::And(l, r) => {
                if ![*l, *r].iter().any(|&c| ntr(id, c) && has(c)) {
                    fail(6, format!("{} has no witness conjunct", show(id)));
                }
            }
            Shape::Fix(k, unf) if *k == crate::syntax::Fixpoint::Mu => {
                if !has(*unf) {
                    fail(7, format!("{} is not unfolded", show(id)));
                }
            }
            Shape::Fix(_, unf) => {
                if !(ntr(id, *unf) && has(*unf)) {
                    fail(8, format!("{} is not unfolded", show(id)));
                }
                if !tr(*unf, id) {
                    fail(9, format!("unfolding of {} does not trace back", show(id)));
                }
            }
            _ => {}
        }
    }
    let neg_traces: Vec<(FormulaId, FormulaId)> = label
        .members()
        .filter_map(|m| match m {
            Member::NegTrace(x, y) => Some((x, y)),
            _ => None,
        })
        .collect();
    for &(x, y) in &neg_traces {
        for &(y2, z) in &neg_traces {
            if y == y2 && !ntr(x, z) {
                fail(10, format!("{} !~> {} is missing", show(x), show(z)));
            }
        }
    }
    out
}

/// The universal player's strategy of the completeness argument: a
/// saturation witness at conjunctions, the modal step of the principal at
/// boxes. Only positions `(φ, ρ)` with `φ` in the label of `ρ` get a move.
pub fn derive_ft(sg: &StrategyGraph<'_>, st: &Structure) -> Result<OpsStrategy, CountermodelError> {
    let ctx = sg.context();
    let mut f = OpsStrategy::default();
    for s in 0..st.model.len() {
        let label = st.label(sg, s);
        for id in label.formulas() {
            match ctx.shape(id) {
                Shape::And(l, r) => {
                    let pick = [*l, *r]
                        .into_iter()
                        .find(|&c| label.has_formula(c) && label.contains(Member::NegTrace(id, c)));
                    match pick {
                        Some(c) => {
                            f.choice.insert((id, s), (c, s));
                        }
                        None => {
                            return Err(CountermodelError::MissingWitness {
                                formula: ctx.display(id),
                                state: s,
                            })
                        }
                    }
                }
                Shape::Box(_, body) => match st.modal[s].iter().find(|(p, _)| *p == id) {
                    Some(&(_, t)) => {
                        f.choice.insert((id, s), (*body, t));
                    }
                    None if st.truncated[s] => {}
                    None => {
                        return Err(CountermodelError::MissingWitness {
                            formula: ctx.display(id),
                            state: s,
                        })
                    }
                },
                _ => {}
            }
        }
    }
    Ok(f)
}

/// Findings of the lemma checks on one structure.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaReport {
    /// Positions reached by an `f_T`-guided match whose formula is missing
    /// from the label, or lacks its focus after a modal step.
    pub in_eval: Vec<String>,
    /// Loops `(φ, ρ) ... (ψ, ρ)` without least fixpoints whose negated trace
    /// atom is missing.
    pub loops: Vec<String>,
    pub positions: usize,
}

impl LemmaReport {
    pub fn is_clean(&self) -> bool {
        self.in_eval.is_empty() && self.loops.is_empty()
    }
}

/// Moves of the evaluation game with the universal player fixed to `f`.
fn guided_moves(
    ctx: &Context,
    st: &Structure,
    f: &OpsStrategy,
    id: FormulaId,
    s: usize,
) -> Vec<(FormulaId, usize)> {
    match ctx.shape(id) {
        Shape::Prop(_) | Shape::NegProp(_) => Vec::new(),
        Shape::Or(l, r) => vec![(*l, s), (*r, s)],
        Shape::Diamond(a, b) => st
            .model
            .successors(a, s)
            .into_iter()
            .map(|t| (*b, t))
            .collect(),
        Shape::And(..) | Shape::Box(..) => f.choice.get(&(id, s)).copied().into_iter().collect(),
        Shape::Fix(_, u) => vec![(*u, s)],
    }
}

/// Simulates all `f_T`-guided matches from the root formulas and checks
/// that every position stays inside the labels, and that every loop back
/// to a state without passing a least fixpoint is recorded as a negated
/// trace atom.
pub fn check_lemmas(sg: &StrategyGraph<'_>, st: &Structure, f: &OpsStrategy) -> LemmaReport {
    let ctx = sg.context();
    let mut report = LemmaReport::default();
    let mut seen: HashSet<(FormulaId, usize)> = HashSet::new();
    let mut queue: VecDeque<(FormulaId, usize, bool)> = VecDeque::new();
    for id in sg.root_sequent().formulas() {
        if seen.insert((id, st.root)) {
            queue.push_back((id, st.root, false));
        }
    }
    while let Some((id, s, after_modal)) = queue.pop_front() {
        let label = st.label(sg, s);
        if !label.has_formula(id) {
            report
                .in_eval
                .push(format!("{} at state {s}", ctx.display(id)));
            continue;
        }
        let seg = sg.segment(st.segment_of[s]);
        if after_modal && seg.focus_applied && !label.contains(Member::Formula(id, Annotation::F)) {
            report
                .in_eval
                .push(format!("{} at state {s} is not in focus", ctx.display(id)));
        }
        let modal = matches!(ctx.shape(id), Shape::Diamond(..) | Shape::Box(..));
        for (t_id, t) in guided_moves(ctx, st, f, id, s) {
            if seen.insert((t_id, t)) {
                queue.push_back((t_id, t, modal));
            }
        }
    }
    report.positions = seen.len();
    for &(phi, rho) in &seen {
        let label = st.label(sg, rho);
        let mut inner: HashSet<(FormulaId, usize)> = HashSet::from([(phi, rho)]);
        let mut queue = VecDeque::from([(phi, rho)]);
        while let Some((id, s)) = queue.pop_front() {
            if s == rho && !label.contains(Member::NegTrace(phi, id)) {
                report.loops.push(format!(
                    "{} !~> {} missing at state {rho}",
                    ctx.display(phi),
                    ctx.display(id)
                ));
            }
            if ctx.is_mu(id) {
                continue;
            }
            for next in guided_moves(ctx, st, f, id, s) {
                if inner.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    report.in_eval.sort();
    report.loops.sort();
    report
}

/// Model-checking verdict for one root formula.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub formula: String,
    pub model_check: bool,
    pub oracle: bool,
}

/// Saturation and lemma findings gathered while building a certificate.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub states: usize,
    pub saturation: Vec<(usize, Violation)>,
    pub lemmas: LemmaReport,
}

/// A finite model falsifying every formula of the root sequent at `root`.
#[derive(Clone, Debug)]
pub struct CountermodelCertificate {
    pub model: KripkeModel,
    pub root: usize,
    pub falsified: Vec<crate::syntax::Formula>,
    pub verification: Vec<Verdict>,
    pub depth: usize,
    pub diagnostics: Diagnostics,
}

impl CountermodelCertificate {
    /// Every root formula is false at the root by both checkers.
    pub fn is_verified(&self) -> bool {
        self.verification
            .iter()
            .all(|v| !v.model_check && !v.oracle)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.model.to_json(),
            "root": self.model.state_name(self.root),
            "depth": self.depth,
            "falsified": self.verification,
            "verified": self.is_verified(),
            "diagnostics": {
                "states": self.diagnostics.states,
                "saturation_violations": self.diagnostics.saturation.len(),
                "in_eval_violations": self.diagnostics.lemmas.in_eval.len(),
                "loop_violations": self.diagnostics.lemmas.loops.len(),
            },
        })
    }

    pub fn to_dot(&self) -> String {
        let dot = self.model.to_dot();
        let root = self.model.state_name(self.root);
        match dot.rfind('}') {
            Some(end) => format!("{}  \"{root}\" [peripheries=2];\n}}\n", &dot[..end]),
            None => dot,
        }
    }
}

/// Modal depths tried up to `cap`: powers of two, then `cap` itself.
pub fn depth_schedule(cap: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 1;
    while d < cap {
        out.push(d);
        d *= 2;
    }
    out.push(cap);
    out
}

/// Saturation of every segment label of `sg` over the trace pairs of the
/// search.
pub fn saturation_report(sg: &StrategyGraph<'_>) -> Vec<(usize, Violation)> {
    let ctx = sg.context();
    let pairs = Calculus::new(ctx, sg.witness().search.config().scope)
        .tc_pairs()
        .to_vec();
    sg.segments()
        .iter()
        .enumerate()
        .flat_map(|(i, seg)| {
            saturation_check_pairs(ctx, &seg.label, &pairs)
                .into_iter()
                .map(move |v| (i, v))
        })
        .collect()
}

/// Builds finite candidates of growing depth from Refuter's strategy and
/// returns the first one on which every root formula fails.
pub fn verified_refute(
    witness: &RefuterWitness,
    depth_cap: usize,
) -> Result<CountermodelCertificate, CountermodelError> {
    let sg = StrategyGraph::new(witness)?;
    let ctx = sg.context();
    let saturation = saturation_report(&sg);
    let falsified: Vec<crate::syntax::Formula> = sg
        .root_sequent()
        .formulas()
        .into_iter()
        .map(|id| ctx.formula(id).clone())
        .collect();
    for depth in depth_schedule(depth_cap) {
        let forest = build_states(&sg, depth);
        let candidate = Structure::quotient(&sg, &forest);
        let mut verification = Vec::with_capacity(falsified.len());
        for phi in &falsified {
            let holds = model_check(&candidate.model, candidate.root, phi)?;
            let oracle = fixpoint_oracle(&candidate.model, phi).contains(&candidate.root);
            verification.push(Verdict {
                formula: phi.to_string(),
                model_check: holds,
                oracle,
            });
        }
        if verification.iter().all(|v| !v.model_check && !v.oracle) {
            let tree = Structure::tree(&sg, &forest);
            let f = derive_ft(&sg, &tree)?;
            let lemmas = check_lemmas(&sg, &tree, &f);
            return Ok(CountermodelCertificate {
                model: candidate.model,
                root: candidate.root,
                falsified,
                verification,
                depth,
                diagnostics: Diagnostics {
                    states: forest.states.len(),
                    saturation,
                    lemmas,
                },
            });
        }
    }
    Err(CountermodelError::Unverified { depth: depth_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::intern_sequent;
    use crate::calculus::parse_sequent;
    use crate::search::{prove, Outcome, SearchConfig};
    use std::sync::Arc;

    fn refute(text: &str) -> Box<RefuterWitness> {
        let raw = parse_sequent(text).unwrap();
        let ctx = Arc::new(crate::calculus::context_for(&raw).unwrap());
        let root = intern_sequent(&ctx, &raw).unwrap();
        match prove(ctx, &root, SearchConfig::default()).unwrap() {
            Outcome::Refuted(w) => w,
            Outcome::Proved(_) => panic!("{text} was proved"),
        }
    }

    #[test]
    fn atom_gives_single_state() {
        let w = refute("p [f]");
        let sg = StrategyGraph::new(&w).unwrap();
        let forest = build_states(&sg, 8);
        assert_eq!(forest.states.len(), 1);
        let st = Structure::quotient(&sg, &forest);
        assert!(!st.model.holds_prop("p", st.root));
        assert!(st.model.relations().values().all(|r| r.is_empty()));
        let cert = verified_refute(&w, 8).unwrap();
        assert_eq!(cert.model.len(), 1);
        assert!(cert.is_verified());
    }

    #[test]
    fn depth_zero_has_no_transitions() {
        let w = refute("<a>p [f], [a]p [f]");
        let sg = StrategyGraph::new(&w).unwrap();
        let forest = build_states(&sg, 0);
        assert_eq!(forest.states.len(), 1);
        assert!(forest.states[0].children.is_empty());
    }

    #[test]
    fn diamond_top_root_has_no_successor() {
        let w = refute("<a>(nu x. x) [f]");
        let cert = verified_refute(&w, 8).unwrap();
        assert!(cert
            .model
            .successors(&Action::new("a"), cert.root)
            .is_empty());
        assert!(cert.diagnostics.saturation.is_empty());
        assert!(
            cert.diagnostics.lemmas.is_clean(),
            "{:?}",
            cert.diagnostics.lemmas
        );
    }

    #[test]
    fn saturation_flags_each_bullet() {
        let raw = parse_sequent("p [u], ~p [u]").unwrap();
        let ctx = crate::calculus::context_for(&raw).unwrap();
        let seq = intern_sequent(&ctx, &raw).unwrap();
        let v = saturation_check(&ctx, &seq);
        assert!(v.iter().any(|x| x.bullet == 1));
        assert!(v.iter().any(|x| x.bullet == 2));

        let raw = parse_sequent("nu x. x [u]").unwrap();
        let ctx = crate::calculus::context_for(&raw).unwrap();
        let seq = intern_sequent(&ctx, &raw).unwrap();
        let v = saturation_check(&ctx, &seq);
        assert!(v.iter().any(|x| x.bullet == 8));
        assert!(v.iter().any(|x| x.bullet == 9));
    }

    #[test]
    fn schedule() {
        assert_eq!(depth_schedule(8), vec![1, 2, 4, 8]);
        assert_eq!(depth_schedule(5), vec![1, 2, 4, 5]);
        assert_eq!(depth_schedule(1), vec![1]);
    }

    #[test]
    fn refuted_labels_are_saturated() {
        for text in [
            "p [f]",
            "p | [a]<a'>p [f]",
            "mu x. [a]x [f]",
            "nu x.(p & <a>x) | mu y.([a']y | q) [f]",
        ] {
            let w = refute(text);
            let cert = verified_refute(&w, 8).unwrap();
            assert!(cert.is_verified(), "{text}");
            assert!(
                cert.diagnostics.saturation.is_empty(),
                "{text}: {:?}",
                cert.diagnostics.saturation
            );
            assert!(
                cert.diagnostics.lemmas.is_clean(),
                "{text}: {:?}",
                cert.diagnostics.lemmas
            );
        }
    }
}
