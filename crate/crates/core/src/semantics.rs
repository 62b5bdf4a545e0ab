//! Regular Kripke models, the evaluation game, and satisfaction relative to
//! positional strategies of the universal player.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::paritygames::{solve, ParityGame, Player, Solution};
use crate::syntax::{Action, Context, Fixpoint, Formula, FormulaId, Node, Shape, SyntaxError};

#[derive(Debug, thiserror::Error)]
pub enum SemanticsError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("formula {0} is not in the context")]
    NotInContext(String),
    #[error("strategy has no move at ({formula}, {state})")]
    MissingChoice { formula: String, state: String },
    #[error("strategy move at ({formula}, {state}) is not admissible")]
    InadmissibleChoice { formula: String, state: String },
    #[error("{count} positional strategies exceed the enumeration limit {limit}")]
    TooManyStrategies { count: f64, limit: usize },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A finite Kripke model in which the relation of `a'` is the converse of
/// the relation of `a`. Only forward relations are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    states: Vec<String>,
    relations: BTreeMap<Arc<str>, BTreeSet<(usize, usize)>>,
    valuation: BTreeMap<Arc<str>, BTreeSet<usize>>,
}

impl KripkeModel {
    /// A model with states named `s0`, `s1`, ...
    pub fn with_states(n: usize) -> Self {
        KripkeModel::named((0..n).map(|i| format!("s{i}")).collect()).expect("distinct names")
    }

    pub fn named(states: Vec<String>) -> Result<Self, SemanticsError> {
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s) {
                return Err(SemanticsError::DuplicateState(s.clone()));
            }
        }
        Ok(KripkeModel {
            states,
            relations: BTreeMap::new(),
            valuation: BTreeMap::new(),
        })
    }

    /// Adds `(from, to)` to the relation of `action`; a converse action adds
    /// the reversed pair to the forward relation.
    pub fn add_edge(&mut self, action: &Action, from: usize, to: usize) {
        assert!(from < self.len() && to < self.len(), "state out of range");
        let pair = if action.is_converse() {
            (to, from)
        } else {
            (from, to)
        };
        self.relations
            .entry(Arc::from(action.name()))
            .or_default()
            .insert(pair);
    }

    pub fn set_true(&mut self, prop: &str, state: usize) {
        assert!(state < self.len(), "state out of range");
        self.valuation
            .entry(Arc::from(prop))
            .or_default()
            .insert(state);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn holds_prop(&self, prop: &str, s: usize) -> bool {
        self.valuation.get(prop).is_some_and(|set| set.contains(&s))
    }

    /// `R_a[s]`, sorted.
    pub fn successors(&self, action: &Action, s: usize) -> Vec<usize> {
        let Some(rel) = self.relations.get(action.name()) else {
            return Vec::new();
        };
        let mut out: Vec<usize> = if action.is_converse() {
            rel.iter().filter(|p| p.1 == s).map(|p| p.0).collect()
        } else {
            rel.iter().filter(|p| p.0 == s).map(|p| p.1).collect()
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Forward pairs per action name.
    pub fn relations(&self) -> &BTreeMap<Arc<str>, BTreeSet<(usize, usize)>> {
        &self.relations
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = ModelFile {
            states: self.states.clone(),
            edges: self
                .relations
                .iter()
                .flat_map(|(a, pairs)| {
                    pairs.iter().map(|&(s, t)| EdgeEntry {
                        action: a.to_string(),
                        from: self.states[s].clone(),
                        to: self.states[t].clone(),
                    })
                })
                .collect(),
            valuation: self
                .valuation
                .iter()
                .map(|(p, set)| {
                    (
                        p.to_string(),
                        set.iter().map(|&s| self.states[s].clone()).collect(),
                    )
                })
                .collect(),
        };
        serde_json::to_value(file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SemanticsError> {
        let file: ModelFile = serde_json::from_str(text)?;
        let mut m = KripkeModel::named(file.states)?;
        let lookup = |m: &KripkeModel, name: &str| {
            m.state_index(name)
                .ok_or_else(|| SemanticsError::UnknownState(name.to_string()))
        };
        for e in &file.edges {
            let (from, to) = (lookup(&m, &e.from)?, lookup(&m, &e.to)?);
            let name = e.action.trim_end_matches('\'');
            let primes = e.action.len() - name.len();
            m.add_edge(&Action::with_direction(name, primes % 2 == 1), from, to);
        }
        for (p, states) in &file.valuation {
            for s in states {
                let s = lookup(&m, s)?;
                m.set_true(p, s);
            }
        }
        Ok(m)
    }

    /// Graphviz rendering; only forward edges are drawn.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph model {\n");
        for (i, name) in self.states.iter().enumerate() {
            let props: Vec<&str> = self
                .valuation
                .iter()
                .filter(|(_, set)| set.contains(&i))
                .map(|(p, _)| &**p)
                .collect();
            let _ = writeln!(out, "  s{i} [label=\"{name}\\n{{{}}}\"];", props.join(","));
        }
        for (a, pairs) in &self.relations {
            for (s, t) in pairs {
                let _ = writeln!(out, "  s{s} -> s{t} [label=\"{a}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    states: Vec<String>,
    #[serde(default)]
    edges: Vec<EdgeEntry>,
    #[serde(default)]
    valuation: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeEntry {
    action: String,
    from: String,
    to: String,
}

/// The evaluation game on the board `Σ × S`. Player 0 is the existential
/// player.
pub struct EvaluationGame<'a> {
    ctx: &'a Context,
    model: &'a KripkeModel,
    game: ParityGame,
}

pub const EXISTS: Player = Player::Even;
pub const FORALL: Player = Player::Odd;

impl<'a> EvaluationGame<'a> {
    pub fn new(ctx: &'a Context, model: &'a KripkeModel) -> Self {
        let n = model.len();
        let mut game = ParityGame::new();
        for id in ctx.ids() {
            for s in 0..n {
                let (owner, priority) = match ctx.shape(id) {
                    Shape::Prop(p) => (
                        if model.holds_prop(p, s) {
                            FORALL
                        } else {
                            EXISTS
                        },
                        0,
                    ),
                    Shape::NegProp(p) => (
                        if model.holds_prop(p, s) {
                            EXISTS
                        } else {
                            FORALL
                        },
                        0,
                    ),
                    Shape::Or(..) | Shape::Diamond(..) => (EXISTS, 0),
                    Shape::And(..) | Shape::Box(..) => (FORALL, 0),
                    Shape::Fix(Fixpoint::Nu, _) => (EXISTS, 2),
                    Shape::Fix(Fixpoint::Mu, _) => (EXISTS, 1),
                };
                game.add_position(owner, priority);
            }
        }
        for id in ctx.ids() {
            for s in 0..n {
                let v = id.index() * n + s;
                match ctx.shape(id) {
                    Shape::Prop(_) | Shape::NegProp(_) => {}
                    Shape::Or(l, r) | Shape::And(l, r) => {
                        game.add_edge(v, l.index() * n + s);
                        game.add_edge(v, r.index() * n + s);
                    }
                    Shape::Diamond(a, b) | Shape::Box(a, b) => {
                        for t in model.successors(a, s) {
                            game.add_edge(v, b.index() * n + t);
                        }
                    }
                    Shape::Fix(_, u) => game.add_edge(v, u.index() * n + s),
                }
            }
        }
        EvaluationGame { ctx, model, game }
    }

    pub fn context(&self) -> &Context {
        self.ctx
    }

    pub fn model(&self) -> &KripkeModel {
        self.model
    }

    pub fn game(&self) -> &ParityGame {
        &self.game
    }

    pub fn position(&self, id: FormulaId, s: usize) -> usize {
        id.index() * self.model.len() + s
    }

    pub fn decode(&self, v: usize) -> (FormulaId, usize) {
        (
            FormulaId((v / self.model.len()) as u32),
            v % self.model.len(),
        )
    }

    pub fn solve(&self) -> EvaluationResult {
        EvaluationResult {
            solution: solve(&self.game),
            states: self.model.len(),
        }
    }

    fn describe(&self, v: usize) -> (String, String) {
        let (id, s) = self.decode(v);
        (self.ctx.display(id), self.model.state_name(s).to_string())
    }

    /// The game in which every universal position follows `f`. Positions
    /// reachable from `start` must have an admissible choice.
    fn restrict(&self, f: &OpsStrategy, start: usize) -> Result<ParityGame, SemanticsError> {
        let mut restricted = ParityGame::new();
        for v in 0..self.game.len() {
            restricted.add_position(self.game.owner(v), self.game.priority(v));
        }
        let mut seen = vec![false; self.game.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            let succ = self.game.successors(v);
            let kept: Vec<usize> = if self.game.owner(v) == FORALL && !succ.is_empty() {
                let (id, s) = self.decode(v);
                let Some(&(tid, t)) = f.choice.get(&(id, s)) else {
                    let (formula, state) = self.describe(v);
                    return Err(SemanticsError::MissingChoice { formula, state });
                };
                if t >= self.model.len() || !succ.contains(&self.position(tid, t)) {
                    let (formula, state) = self.describe(v);
                    return Err(SemanticsError::InadmissibleChoice { formula, state });
                }
                vec![self.position(tid, t)]
            } else {
                succ.to_vec()
            };
            for w in kept {
                restricted.add_edge(v, w);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Ok(restricted)
    }

    /// `S, s ⊩_f φ`: the strategy `f` does not win for the universal player
    /// at `(φ, s)`.
    pub fn satisfies_under(
        &self,
        f: &OpsStrategy,
        s: usize,
        phi: FormulaId,
    ) -> Result<bool, SemanticsError> {
        let start = self.position(phi, s);
        let restricted = self.restrict(f, start)?;
        Ok(solve(&restricted).winner(start) == EXISTS)
    }

    /// Whether some `f`-guided match leads from `(φ, s)` to `(ψ, s)` without
    /// passing a least-fixpoint formula before its last position.
    pub fn satisfies_trace_atom(
        &self,
        f: &OpsStrategy,
        s: usize,
        phi: FormulaId,
        psi: FormulaId,
    ) -> bool {
        let start = self.position(phi, s);
        let target = self.position(psi, s);
        if start == target {
            return true;
        }
        let mut seen = vec![false; self.game.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            let (id, t) = self.decode(v);
            if self.ctx.is_mu(id) {
                continue;
            }
            let next: Vec<usize> = if self.game.owner(v) == FORALL {
                f.choice
                    .get(&(id, t))
                    .map(|&(tid, u)| self.position(tid, u))
                    .filter(|w| self.game.successors(v).contains(w))
                    .into_iter()
                    .collect()
            } else {
                self.game.successors(v).to_vec()
            };
            for w in next {
                if w == target {
                    return true;
                }
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// All positional strategies of the universal player that win on the
    /// whole universal winning region. Fails when there are more than `limit`
    /// candidate strategies.
    pub fn enumerate_ops(&self, limit: usize) -> Result<Vec<OpsStrategy>, SemanticsError> {
        let forall: Vec<usize> = (0..self.game.len())
            .filter(|&v| self.game.owner(v) == FORALL && !self.game.successors(v).is_empty())
            .collect();
        let count: f64 = forall
            .iter()
            .map(|&v| self.game.successors(v).len() as f64)
            .product();
        if count > limit as f64 {
            return Err(SemanticsError::TooManyStrategies { count, limit });
        }
        let truth = solve(&self.game);
        let mut slot = vec![None; self.game.len()];
        for (i, &v) in forall.iter().enumerate() {
            slot[v] = Some(i);
        }
        let mut out = Vec::new();
        let mut pick = vec![0usize; forall.len()];
        loop {
            let mut f = OpsStrategy::default();
            for (i, &v) in forall.iter().enumerate() {
                let (id, s) = self.decode(v);
                f.choice
                    .insert((id, s), self.decode(self.game.successors(v)[pick[i]]));
            }
            let mut restricted = ParityGame::new();
            for v in 0..self.game.len() {
                restricted.add_position(self.game.owner(v), self.game.priority(v));
            }
            for (v, &sv) in slot.iter().enumerate() {
                match sv {
                    Some(i) => restricted.add_edge(v, self.game.successors(v)[pick[i]]),
                    None => {
                        for &w in self.game.successors(v) {
                            restricted.add_edge(v, w);
                        }
                    }
                }
            }
            let sol = solve(&restricted);
            if (0..self.game.len()).all(|v| sol.winner(v) == truth.winner(v)) {
                out.push(f);
            }
            // odometer
            let mut i = 0;
            loop {
                if i == forall.len() {
                    return Ok(out);
                }
                pick[i] += 1;
                if pick[i] < self.game.successors(forall[i]).len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    }
}

/// Winning regions of a solved evaluation game.
pub struct EvaluationResult {
    solution: Solution,
    states: usize,
}

impl EvaluationResult {
    pub fn holds(&self, phi: FormulaId, s: usize) -> bool {
        self.solution.winner(phi.index() * self.states + s) == EXISTS
    }

    /// Winning move at a position, as (formula, state).
    pub fn choice(&self, phi: FormulaId, s: usize) -> Option<(FormulaId, usize)> {
        self.solution
            .choice(phi.index() * self.states + s)
            .map(|w| (FormulaId((w / self.states) as u32), w % self.states))
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }
}

/// A positional strategy for the universal player: a move for some
/// universal positions `(formula, state)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpsStrategy {
    pub choice: BTreeMap<(FormulaId, usize), (FormulaId, usize)>,
}

/// Whether `φ` holds at state `s`, decided by solving the evaluation game
/// over the negation-closed context of `φ`.
pub fn model_check(m: &KripkeModel, s: usize, phi: &Formula) -> Result<bool, SemanticsError> {
    if s >= m.len() {
        return Err(SemanticsError::UnknownState(s.to_string()));
    }
    let ctx = Context::new([phi.clone()])?;
    let eg = EvaluationGame::new(&ctx, m);
    let id = ctx.id_of(phi).expect("seed is in its context");
    Ok(eg.solve().holds(id, s))
}

/// Denotation of a closed formula by Knaster-Tarski iteration.
pub fn fixpoint_oracle(m: &KripkeModel, phi: &Formula) -> BTreeSet<usize> {
    let bits = denote(m, phi, &mut Vec::new());
    (0..m.len()).filter(|&s| bits[s]).collect()
}

fn denote(m: &KripkeModel, phi: &Formula, env: &mut Vec<Vec<bool>>) -> Vec<bool> {
    let n = m.len();
    match phi.node() {
        Node::Prop(p) => (0..n).map(|s| m.holds_prop(p, s)).collect(),
        Node::NegProp(p) => (0..n).map(|s| !m.holds_prop(p, s)).collect(),
        Node::Var(i) => env[env.len() - 1 - *i as usize].clone(),
        Node::Or(l, r) => {
            let (a, b) = (denote(m, l, env), denote(m, r, env));
            a.iter().zip(&b).map(|(x, y)| *x || *y).collect()
        }
        Node::And(l, r) => {
            let (a, b) = (denote(m, l, env), denote(m, r, env));
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Node::Diamond(a, b) => {
            let inner = denote(m, b, env);
            (0..n)
                .map(|s| m.successors(a, s).iter().any(|&t| inner[t]))
                .collect()
        }
        Node::Box(a, b) => {
            let inner = denote(m, b, env);
            (0..n)
                .map(|s| m.successors(a, s).iter().all(|&t| inner[t]))
                .collect()
        }
        Node::Fix(k, body) => {
            let mut current = vec![*k == Fixpoint::Nu; n];
            loop {
                env.push(current.clone());
                let next = denote(m, body, env);
                env.pop();
                if next == current {
                    return current;
                }
                current = next;
            }
        }
    }
}

/// Map from universal positions to the formula they hold, for convenience
/// when building strategies by hand.
pub fn ops_from_pairs(
    pairs: impl IntoIterator<Item = ((FormulaId, usize), (FormulaId, usize))>,
) -> OpsStrategy {
    OpsStrategy {
        choice: pairs.into_iter().collect::<BTreeMap<_, _>>(),
    }
}

/// Ids of the formulas that hold at `s`, for every formula of `ctx`.
pub fn truth_table(ctx: &Context, m: &KripkeModel) -> HashMap<FormulaId, BTreeSet<usize>> {
    let res = EvaluationGame::new(ctx, m).solve();
    ctx.ids()
        .map(|id| (id, (0..m.len()).filter(|&s| res.holds(id, s)).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;
    use petgraph::algo::tarjan_scc;
    use petgraph::graph::DiGraph;

    fn f(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    fn a() -> Action {
        Action::new("a")
    }

    #[test]
    fn loop_model_satisfies_nu() {
        let mut m = KripkeModel::with_states(1);
        m.add_edge(&a(), 0, 0);
        let phi = f("nu x. <a><a'>x");
        assert!(model_check(&m, 0, &phi).unwrap());
        assert_eq!(fixpoint_oracle(&m, &phi), BTreeSet::from([0]));
    }

    #[test]
    fn diamond_without_successor_fails() {
        let m = KripkeModel::with_states(1);
        assert!(!model_check(&m, 0, &f("<a>p")).unwrap());
    }

    #[test]
    fn back_to_p_on_two_states() {
        let mut m = KripkeModel::with_states(2);
        m.add_edge(&a(), 0, 1);
        m.set_true("p", 0);
        let psi = f("nu y. [a]y & mu x. <a'>x | p");
        assert!(model_check(&m, 0, &psi).unwrap());
        assert_eq!(fixpoint_oracle(&m, &psi), BTreeSet::from([0, 1]));
    }

    #[test]
    fn oracle_constants() {
        let mut m = KripkeModel::with_states(3);
        m.add_edge(&a(), 0, 1);
        assert_eq!(fixpoint_oracle(&m, &f("nu x. x")).len(), 3);
        assert!(fixpoint_oracle(&m, &f("mu x. x")).is_empty());
    }

    #[test]
    fn regular_by_construction() {
        let mut m = KripkeModel::with_states(2);
        m.add_edge(&a().converse(), 1, 0);
        assert_eq!(m.successors(&a(), 0), vec![1]);
        assert_eq!(m.successors(&a().converse(), 1), vec![0]);
        assert!(m.successors(&a(), 1).is_empty());
    }

    #[test]
    fn board_ownership() {
        let mut m = KripkeModel::with_states(1);
        m.set_true("p", 0);
        let ctx = Context::new([f("p | mu x. <a>x")]).unwrap();
        let eg = EvaluationGame::new(&ctx, &m);
        let p = eg.position(ctx.id_of(&f("p")).unwrap(), 0);
        assert_eq!(eg.game().owner(p), FORALL);
        assert!(eg.game().successors(p).is_empty());
        let mu = ctx.id_of(&f("mu x. <a>x")).unwrap();
        let v = eg.position(mu, 0);
        let unfolded = ctx.id_of(&f("<a>mu x. <a>x")).unwrap();
        assert_eq!(eg.game().successors(v), &[eg.position(unfolded, 0)]);
        assert_eq!(eg.game().priority(v), 1);
        let dia = eg.position(unfolded, 0);
        assert_eq!(eg.game().owner(dia), EXISTS);
        assert!(eg.game().successors(dia).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"states":["s","t"],"edges":[{"action":"a","from":"s","to":"t"},{"action":"b'","from":"s","to":"t"}],"valuation":{"p":["s"]}}"#;
        let m = KripkeModel::from_json(text).unwrap();
        assert_eq!(m.successors(&Action::new("b"), 1), vec![0]);
        assert_eq!(m.successors(&a().converse(), 1), vec![0]);
        let again = KripkeModel::from_json(&m.to_json().to_string()).unwrap();
        assert_eq!(m, again);
        assert!(KripkeModel::from_json(
            r#"{"states":["s"],"edges":[{"action":"a","from":"s","to":"x"}]}"#
        )
        .is_err());
    }

    #[test]
    fn trace_atoms_basic() {
        let mut m = KripkeModel::with_states(2);
        m.add_edge(&a(), 0, 1);
        let ctx = Context::new([f("<a>p")]).unwrap();
        let eg = EvaluationGame::new(&ctx, &m);
        let dia = ctx.id_of(&f("<a>p")).unwrap();
        let p = ctx.id_of(&f("p")).unwrap();
        let none = OpsStrategy::default();
        assert!(eg.satisfies_trace_atom(&none, 0, dia, dia));
        assert!(!eg.satisfies_trace_atom(&none, 0, dia, p));
    }

    #[test]
    fn trace_atoms_compose() {
        let mut m = KripkeModel::with_states(2);
        m.add_edge(&a(), 0, 1);
        m.add_edge(&a(), 1, 0);
        let ctx = Context::new([f("nu x. <a><a'>x | q")]).unwrap();
        let eg = EvaluationGame::new(&ctx, &m);
        let f_ops = eg.enumerate_ops(1 << 12).unwrap();
        for ops in &f_ops {
            for s in 0..2 {
                for x in ctx.ids() {
                    for y in ctx.ids() {
                        for z in ctx.ids() {
                            if eg.satisfies_trace_atom(ops, s, x, y)
                                && eg.satisfies_trace_atom(ops, s, y, z)
                            {
                                assert!(eg.satisfies_trace_atom(ops, s, x, z));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn satisfies_under_basics() {
        let mut m = KripkeModel::with_states(1);
        m.set_true("p", 0);
        let ctx = Context::new([f("~p"), f("[a]q")]).unwrap();
        let eg = EvaluationGame::new(&ctx, &m);
        let none = OpsStrategy::default();
        assert!(!eg
            .satisfies_under(&none, 0, ctx.id_of(&f("~p")).unwrap())
            .unwrap());
        // universal player stuck at the box
        assert!(eg
            .satisfies_under(&none, 0, ctx.id_of(&f("[a]q")).unwrap())
            .unwrap());
    }

    #[test]
    fn missing_choice_is_an_error() {
        let m = KripkeModel::with_states(1);
        let ctx = Context::new([f("p & q")]).unwrap();
        let eg = EvaluationGame::new(&ctx, &m);
        let res = eg.satisfies_under(&OpsStrategy::default(), 0, ctx.id_of(&f("p & q")).unwrap());
        assert!(matches!(res, Err(SemanticsError::MissingChoice { .. })));
    }

    #[test]
    fn truth_is_universal_satisfaction() {
        let mut m = KripkeModel::with_states(2);
        m.add_edge(&a(), 0, 1);
        m.add_edge(&a(), 1, 1);
        m.set_true("p", 1);
        let ctx = Context::new([f("nu y. [a]y & (p | <a'>y)")]).unwrap();
        let eg = EvaluationGame::new(&ctx, &m);
        let truth = eg.solve();
        let ops = eg.enumerate_ops(1 << 14).unwrap();
        assert!(!ops.is_empty());
        for id in ctx.ids() {
            for s in 0..2 {
                let all = ops.iter().all(|o| eg.satisfies_under(o, s, id).unwrap());
                assert_eq!(all, truth.holds(id, s), "{} at {s}", ctx.display(id));
            }
        }
    }

    #[test]
    fn no_cycle_mixes_fixpoint_kinds() {
        let mut m = KripkeModel::with_states(2);
        m.add_edge(&a(), 0, 1);
        m.add_edge(&a(), 1, 0);
        let ctx = Context::new([
            f("nu y. ([a]y & mu x. (<a'>x | p))"),
            f("mu x. <a>x | nu y. [a']y"),
        ])
        .unwrap();
        let eg = EvaluationGame::new(&ctx, &m);
        let g = eg.game();
        let mut graph = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = (0..g.len()).map(|v| graph.add_node(v)).collect();
        for v in 0..g.len() {
            for &w in g.successors(v) {
                graph.add_edge(nodes[v], nodes[w], ());
            }
        }
        for scc in tarjan_scc(&graph) {
            let kinds: BTreeSet<u32> = scc
                .iter()
                .map(|&ix| g.priority(graph[ix]))
                .filter(|&p| p > 0)
                .collect();
            assert!(kinds.len() <= 1);
        }
    }
}
