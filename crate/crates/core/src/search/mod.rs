//! The proof search game, cyclic proofs extracted from Prover's winning
//! strategies, and an independent checker for such proofs.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

mod hint;

use crate::calculus::{
    intern_sequent, parse_sequent, Calculus, Member, Rule, RuleInstance, Sequent, TraceScope,
};
use crate::paritygames::{solve, ParityGame, Player, Solution};
use crate::syntax::{parse_formula, Action, Context, Shape, SyntaxError};

pub const PROVER: Player = Player::Even;
pub const REFUTER: Player = Player::Odd;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Prover follows the five-phase strategy used for countermodels.
    #[default]
    Phased,
    /// Prover may play any valid instance.
    Full,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "phased" => Ok(Mode::Phased),
            "full" => Ok(Mode::Full),
            _ => Err(format!("unknown mode `{s}` (expected phased or full)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Phased => "phased",
            Mode::Full => "full",
        })
    }
}

/// Which restriction of Prover's moves a search game uses.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    /// The five-phase strategy.
    Phased,
    /// Every valid instance.
    Full,
    /// Local rules and transitivity first, then a choice of modal rules,
    /// cuts on box bodies and trace cuts that a jump keeps. Only used to
    /// look for proofs.
    Guided,
}

impl std::fmt::Display for GameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GameKind::Phased => "phased",
            GameKind::Full => "full",
            GameKind::Guided => "guided",
        })
    }
}

impl From<Mode> for GameKind {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Phased => GameKind::Phased,
            Mode::Full => GameKind::Full,
        }
    }
}

#[derive(Copy, Clone, Debug)]
pub struct SearchConfig {
    pub mode: Mode,
    pub scope: TraceScope,
    /// Upper bound on the number of game positions.
    pub max_positions: usize,
    /// Upper bound for the guided game tried before the exact search.
    pub guided_positions: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Phased,
            scope: TraceScope::All,
            max_positions: 4_000_000,
            guided_positions: 200_000,
        }
    }
}

impl SearchConfig {
    pub fn with_mode(mode: Mode) -> Self {
        SearchConfig {
            mode,
            ..Default::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("search game exceeded {0} positions")]
    Budget(usize),
    #[error("sequent does not fit the context")]
    ContextMismatch,
}

/// Where Prover is in the phased strategy. `Free` is used in full mode.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    /// Productive cuts and trace cuts.
    Cut,
    /// The focus rule, when nothing is focused.
    Focus,
    /// Cumulative productive R∨, R∧, Rμ, Rν, trans; then axioms.
    Local,
    /// A choice of modal rule.
    Modal,
    Free,
    Guided,
}

/// Ω on instance positions.
pub fn instance_priority(conclusion: &Sequent, rule: Rule) -> u32 {
    if !conclusion.has_focus() {
        3
    } else if rule == Rule::Modal {
        2
    } else {
        1
    }
}

#[derive(Clone, Debug)]
pub struct InstanceRecord {
    pub conclusion: u32,
    pub rule: Rule,
    pub principal: Option<Member>,
    pub auxiliary: Option<Member>,
    pub action: Option<Action>,
    pub keeps_principal: bool,
    pub premisses: Vec<u32>,
    /// Game positions of the premisses, in order. May repeat.
    pub targets: Vec<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Position {
    Sequent { seq: u32, phase: Phase },
    Instance { record: u32 },
}

enum Pending {
    Moves(Vec<(RuleInstance, Phase)>),
    Later,
    Done,
}

/// The search game from a root sequent, materialized lazily. Prover
/// positions that have not been expanded yet have no moves.
pub struct SearchGame {
    ctx: Arc<Context>,
    config: SearchConfig,
    kind: GameKind,
    sequents: Vec<Sequent>,
    seq_index: HashMap<Sequent, u32>,
    nodes: HashMap<(u32, Phase), usize>,
    records: Vec<InstanceRecord>,
    positions: Vec<Position>,
    pending: Vec<Pending>,
    game: ParityGame,
    root: usize,
}

/// Prover's moves at `(seq, phase)`, moving forward through phases that
/// offer nothing.
fn phase_moves(
    calc: &Calculus<'_>,
    seq: &Sequent,
    phase: Phase,
) -> (Phase, Vec<(RuleInstance, Phase)>) {
    if phase == Phase::Free {
        let all = calc.applicable_instances(seq);
        return (
            Phase::Free,
            all.into_iter().map(|i| (i, Phase::Free)).collect(),
        );
    }
    if phase == Phase::Guided {
        return (
            phase,
            guided_moves(calc, seq)
                .into_iter()
                .map(|i| (i, phase))
                .collect(),
        );
    }
    let mut phase = phase;
    loop {
        match phase {
            Phase::Cut => {
                if let Some(ax) = calc.axiom(seq) {
                    return (phase, vec![(ax, phase)]);
                }
                if let Some(i) = calc.productive_cut(seq) {
                    return (phase, vec![(i, Phase::Cut)]);
                }
                phase = Phase::Focus;
            }
            Phase::Focus => {
                if let Some(i) = calc.focus_instance(seq) {
                    return (phase, vec![(i, Phase::Local)]);
                }
                phase = Phase::Local;
            }
            Phase::Local => {
                if let Some(ax) = calc.axiom(seq) {
                    return (phase, vec![(ax, phase)]);
                }
                if let Some(i) = calc.productive_cumulative(seq) {
                    return (phase, vec![(i, Phase::Local)]);
                }
                phase = Phase::Modal;
            }
            Phase::Modal => {
                let modal = calc.modal_instances(seq);
                return (phase, modal.into_iter().map(|i| (i, Phase::Cut)).collect());
            }
            Phase::Free | Phase::Guided => unreachable!(),
        }
    }
}

fn guided_moves(calc: &Calculus<'_>, seq: &Sequent) -> Vec<RuleInstance> {
    if let Some(ax) = calc.axiom(seq) {
        return vec![ax];
    }
    if let Some(f) = calc.focus_instance(seq) {
        return vec![f];
    }
    let ctx = calc.context();
    let productive = |i: &RuleInstance| i.premisses.iter().all(|p| p != seq);
    let mut modal = Vec::new();
    for m in seq.members() {
        let Member::Formula(id, b) = m else { continue };
        let keep = !matches!(ctx.shape(id), Shape::Box(..));
        let Some(i) = calc.principal_instance(seq, id, b, keep) else {
            continue;
        };
        if !productive(&i) {
            continue;
        }
        if i.rule == Rule::Modal {
            modal.push(i);
        } else {
            return vec![i];
        }
    }
    if let Some(t) = calc
        .trans_instances(seq)
        .into_iter()
        .find(|i| productive(i))
    {
        return vec![t];
    }
    let actions = ctx.actions();
    let body = |id| actions.iter().any(|a| ctx.box_of(a, id).is_some());
    for id in ctx.ids() {
        let neg = ctx.negation(id);
        if id < neg && (body(id) || body(neg)) && !seq.has_formula(id) && !seq.has_formula(neg) {
            modal.push(calc.cut_instance(seq, id));
        }
    }
    // trace cuts whose atom survives some jump
    let modal_action = |id| match ctx.shape(id) {
        Shape::Box(a, _) | Shape::Diamond(a, _) if seq.has_formula(id) => Some(a.converse()),
        _ => None,
    };
    for &(x, y) in calc.tc_pairs() {
        if seq.contains(Member::Trace(x, y)) || seq.contains(Member::NegTrace(x, y)) {
            continue;
        }
        let forward =
            seq.has_formula(y) && modal_action(x).is_some_and(|c| ctx.diamond_of(&c, y).is_some());
        let backward =
            seq.has_formula(x) && modal_action(y).is_some_and(|c| ctx.diamond_of(&c, x).is_some());
        if forward || backward {
            modal.push(calc.tc_instance(seq, x, y));
        }
    }
    modal
}

impl SearchGame {
    /// The game with only its root position.
    pub fn new(
        ctx: Arc<Context>,
        root: &Sequent,
        kind: GameKind,
        config: SearchConfig,
    ) -> Result<SearchGame, SearchError> {
        if root.context_size() != ctx.len() {
            return Err(SearchError::ContextMismatch);
        }
        let mut sg = SearchGame {
            ctx: ctx.clone(),
            config,
            kind,
            sequents: Vec::new(),
            seq_index: HashMap::new(),
            nodes: HashMap::new(),
            records: Vec::new(),
            positions: Vec::new(),
            pending: Vec::new(),
            game: ParityGame::new(),
            root: 0,
        };
        let calc = Calculus::new(&ctx, config.scope);
        let start = match kind {
            GameKind::Phased => Phase::Cut,
            GameKind::Full => Phase::Free,
            GameKind::Guided => Phase::Guided,
        };
        sg.root = sg.node(&calc, root.clone(), start)?;
        Ok(sg)
    }

    /// The whole reachable game.
    pub fn build(
        ctx: Arc<Context>,
        root: &Sequent,
        config: SearchConfig,
    ) -> Result<SearchGame, SearchError> {
        Self::build_kind(ctx, root, config.mode.into(), config)
    }

    pub fn build_kind(
        ctx: Arc<Context>,
        root: &Sequent,
        kind: GameKind,
        config: SearchConfig,
    ) -> Result<SearchGame, SearchError> {
        let mut sg = SearchGame::new(ctx, root, kind, config)?;
        sg.expand_all()?;
        Ok(sg)
    }

    fn intern(&mut self, s: Sequent) -> u32 {
        if let Some(&i) = self.seq_index.get(&s) {
            return i;
        }
        let i = self.sequents.len() as u32;
        self.sequents.push(s.clone());
        self.seq_index.insert(s, i);
        i
    }

    fn node(
        &mut self,
        calc: &Calculus<'_>,
        seq: Sequent,
        phase: Phase,
    ) -> Result<usize, SearchError> {
        let sid = self.intern(seq);
        if let Some(&v) = self.nodes.get(&(sid, phase)) {
            return Ok(v);
        }
        let (settled, pending) = if phase == Phase::Free {
            (phase, Pending::Later)
        } else {
            let (settled, moves) = phase_moves(calc, &self.sequents[sid as usize], phase);
            if let Some(&v) = self.nodes.get(&(sid, settled)) {
                self.nodes.insert((sid, phase), v);
                return Ok(v);
            }
            (settled, Pending::Moves(moves))
        };
        if self.game.len() >= self.config.max_positions {
            return Err(SearchError::Budget(self.config.max_positions));
        }
        let v = self.game.add_position(PROVER, 0);
        self.positions.push(Position::Sequent {
            seq: sid,
            phase: settled,
        });
        self.pending.push(pending);
        self.nodes.insert((sid, phase), v);
        self.nodes.insert((sid, settled), v);
        Ok(v)
    }

    fn expand_with(&mut self, calc: &Calculus<'_>, v: usize) -> Result<(), SearchError> {
        let Position::Sequent { seq, phase } = self.positions[v] else {
            return Ok(());
        };
        let moves = match std::mem::replace(&mut self.pending[v], Pending::Done) {
            Pending::Done => return Ok(()),
            Pending::Moves(m) => m,
            Pending::Later => phase_moves(calc, &self.sequents[seq as usize], phase).1,
        };
        for (inst, next) in moves {
            let w = self
                .game
                .add_position(REFUTER, instance_priority(&inst.conclusion, inst.rule));
            let record = self.records.len() as u32;
            self.positions.push(Position::Instance { record });
            self.pending.push(Pending::Done);
            let mut premisses = Vec::with_capacity(inst.premisses.len());
            let mut targets = Vec::with_capacity(inst.premisses.len());
            for p in inst.premisses {
                let t = self.node(calc, p, next)?;
                let Position::Sequent { seq, .. } = self.positions[t] else {
                    unreachable!()
                };
                premisses.push(seq);
                targets.push(t);
            }
            self.records.push(InstanceRecord {
                conclusion: seq,
                rule: inst.rule,
                principal: inst.principal,
                auxiliary: inst.auxiliary,
                action: inst.action,
                keeps_principal: inst.keeps_principal,
                premisses,
                targets: targets.clone(),
            });
            self.game.add_edge(v, w);
            for t in targets {
                self.game.add_edge(w, t);
            }
        }
        Ok(())
    }

    /// Expands the given Prover positions.
    pub fn expand(&mut self, positions: &[usize]) -> Result<(), SearchError> {
        let ctx = self.ctx.clone();
        let calc = Calculus::new(&ctx, self.config.scope);
        for &v in positions {
            self.expand_with(&calc, v)?;
        }
        Ok(())
    }

    /// Expands everything reachable from the root.
    pub fn expand_all(&mut self) -> Result<(), SearchError> {
        let ctx = self.ctx.clone();
        let calc = Calculus::new(&ctx, self.config.scope);
        let mut v = 0;
        while v < self.game.len() {
            self.expand_with(&calc, v)?;
            v += 1;
        }
        Ok(())
    }

    /// An unexpanded Prover position.
    pub fn is_frontier(&self, v: usize) -> bool {
        !matches!(self.pending[v], Pending::Done)
    }

    pub fn is_complete(&self) -> bool {
        (0..self.len()).all(|v| !self.is_frontier(v))
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn config(&self) -> SearchConfig {
        self.config
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn game(&self) -> &ParityGame {
        &self.game
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn position(&self, v: usize) -> Position {
        self.positions[v]
    }

    pub fn sequent(&self, seq: u32) -> &Sequent {
        &self.sequents[seq as usize]
    }

    /// The sequent at a Prover position, or the conclusion at an instance.
    pub fn sequent_at(&self, v: usize) -> &Sequent {
        match self.positions[v] {
            Position::Sequent { seq, .. } => self.sequent(seq),
            Position::Instance { record } => self.sequent(self.records[record as usize].conclusion),
        }
    }

    pub fn record(&self, record: u32) -> &InstanceRecord {
        &self.records[record as usize]
    }

    /// The instance record at an instance position.
    pub fn record_at(&self, v: usize) -> Option<&InstanceRecord> {
        match self.positions[v] {
            Position::Instance { record } => Some(self.record(record)),
            Position::Sequent { .. } => None,
        }
    }

    pub fn instance(&self, record: &InstanceRecord) -> RuleInstance {
        RuleInstance {
            conclusion: self.sequent(record.conclusion).clone(),
            rule: record.rule,
            principal: record.principal,
            auxiliary: record.auxiliary,
            action: record.action.clone(),
            keeps_principal: record.keeps_principal,
            premisses: record
                .premisses
                .iter()
                .map(|&p| self.sequent(p).clone())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.game.len()
    }

    pub fn is_empty(&self) -> bool {
        self.game.is_empty()
    }

    pub fn sequent_count(&self) -> usize {
        self.sequents.len()
    }
}

const INF: u64 = u64::MAX;

fn combine(choosing: bool, acc: u64, x: u64) -> u64 {
    if choosing {
        acc.min(x)
    } else {
        acc.saturating_add(x)
    }
}

/// Order in which a search for proofs tries Prover's moves.
fn prover_rank(rec: &InstanceRecord) -> (u8, bool) {
    let r = match rec.rule {
        Rule::Ax1 | Rule::Ax2 | Rule::Ax3 => 0,
        Rule::Focus => 1,
        Rule::Or | Rule::And | Rule::Mu | Rule::Nu => 2,
        Rule::Trans => 3,
        Rule::Modal => 4,
        Rule::Cut => 5,
        Rule::Tc => 6,
    };
    (r, rec.keeps_principal)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Proved,
    Refuted,
    Open,
}

/// Solves a partially built game from both sides: with unexpanded
/// positions lost by Prover, and with them won by Prover. A win in the
/// first is a win in the full game, as is a loss in the second.
pub struct LocalSearch {
    pub search: SearchGame,
    pessimistic: Solution,
    optimistic: Solution,
    grow_proofs: bool,
    grow_refutations: bool,
}

impl LocalSearch {
    pub fn new(search: SearchGame, grow_proofs: bool, grow_refutations: bool) -> Self {
        let (pessimistic, optimistic) = Self::solutions(&search);
        LocalSearch {
            search,
            pessimistic,
            optimistic,
            grow_proofs,
            grow_refutations,
        }
    }

    fn solutions(search: &SearchGame) -> (Solution, Solution) {
        let pessimistic = solve(search.game());
        let mut open = search.game().clone();
        let sink = open.add_position(PROVER, 2);
        open.add_edge(sink, sink);
        for v in 0..search.len() {
            if search.is_frontier(v) {
                open.add_edge(v, sink);
            }
        }
        (pessimistic, solve(&open))
    }

    pub fn status(&self) -> Status {
        let root = self.search.root();
        if self.pessimistic.winner(root) == PROVER {
            Status::Proved
        } else if self.optimistic.winner(root) == REFUTER {
            Status::Refuted
        } else {
            Status::Open
        }
    }

    fn settled(&self, v: usize) -> bool {
        self.winner(v).is_some()
    }

    /// The winner at `v` if the last solutions agree on it. Positions added
    /// since then are unsettled.
    fn winner(&self, v: usize) -> Option<Player> {
        if v >= self.pessimistic.winners().len() {
            None
        } else if self.pessimistic.winner(v) == PROVER {
            Some(PROVER)
        } else if self.optimistic.winner(v) == REFUTER {
            Some(REFUTER)
        } else {
            None
        }
    }

    /// Cost of a Prover move for the proof estimate: steps that analyse
    /// formulas or cut on a box body are cheap, the rest is a last resort.
    fn weight(&self, rec: &InstanceRecord) -> u64 {
        if rec.premisses.contains(&rec.conclusion) {
            return INF;
        }
        let ctx = self.search.context();
        match rec.rule {
            Rule::Ax1 | Rule::Ax2 | Rule::Ax3 => 0,
            Rule::Or | Rule::And | Rule::Mu | Rule::Nu if !rec.keeps_principal => 1,
            Rule::Focus | Rule::Modal => 1,
            Rule::Cut => match rec.principal {
                Some(Member::Formula(id, _))
                    if ctx.actions().iter().any(|a| ctx.box_of(a, id).is_some()) =>
                {
                    2
                }
                _ => 50,
            },
            _ => 50,
        }
    }

    /// Estimated number of frontier positions `player` still has to settle
    /// from each position: a depth-first pass where `player` picks the
    /// cheapest move, the opponent's moves add up, and an edge back onto the
    /// search stack is free when the cycle it closes is won by `player`.
    fn estimate(&self, player: Player) -> Vec<u64> {
        const UNSEEN: u8 = 0;
        const OPEN: u8 = 1;
        const DONE: u8 = 2;
        let sg = &self.search;
        let game = sg.game();
        let n = sg.len();
        let mut state = vec![UNSEEN; n];
        let mut value = vec![INF; n];
        let mut depth_of = vec![0usize; n];
        // frames: (position, next successor, accumulated value)
        let mut stack: Vec<(usize, usize, u64)> = Vec::new();
        let mut last_unfocused: Vec<isize> = Vec::new();
        let mut last_modal: Vec<isize> = Vec::new();
        let leaf = |v: usize| -> Option<u64> {
            if let Some(winner) = self.winner(v) {
                Some(if winner == player { 0 } else { INF })
            } else if sg.is_frontier(v) {
                Some(1)
            } else {
                None
            }
        };
        let push = |v: usize,
                    stack: &mut Vec<(usize, usize, u64)>,
                    last_unfocused: &mut Vec<isize>,
                    last_modal: &mut Vec<isize>,
                    state: &mut Vec<u8>,
                    depth_of: &mut Vec<usize>| {
            let k = stack.len() as isize;
            let prev_u = last_unfocused.last().copied().unwrap_or(-1);
            let prev_m = last_modal.last().copied().unwrap_or(-1);
            let (unfocused, modal) = match sg.position(v) {
                Position::Sequent { seq, .. } => (!sg.sequent(seq).has_focus(), false),
                Position::Instance { record } => (false, sg.record(record).rule == Rule::Modal),
            };
            last_unfocused.push(if unfocused { k } else { prev_u });
            last_modal.push(if modal { k } else { prev_m });
            let init = if game.owner(v) == player { INF } else { 0 };
            stack.push((v, 0, init));
            state[v] = OPEN;
            depth_of[v] = k as usize;
        };
        let root = sg.root();
        if let Some(x) = leaf(root) {
            value[root] = x;
            return value;
        }
        push(
            root,
            &mut stack,
            &mut last_unfocused,
            &mut last_modal,
            &mut state,
            &mut depth_of,
        );
        while let Some(&(v, next, acc)) = stack.last() {
            let succ = game.successors(v);
            if next == succ.len() {
                let mut fin = if game.owner(v) == player || !succ.is_empty() {
                    acc
                } else {
                    0
                };
                if player == PROVER {
                    if let Some(rec) = sg.record_at(v) {
                        fin = fin.saturating_add(self.weight(rec));
                    }
                }
                value[v] = fin;
                state[v] = DONE;
                stack.pop();
                last_unfocused.pop();
                last_modal.pop();
                if let Some(top) = stack.last_mut() {
                    let owner = game.owner(top.0);
                    top.2 = combine(owner == player, top.2, fin);
                }
                continue;
            }
            stack.last_mut().unwrap().1 += 1;
            let w = succ[next];
            let contribution = match state[w] {
                DONE => Some(value[w]),
                OPEN => {
                    let i = depth_of[w] as isize;
                    let k = stack.len() - 1;
                    let prover_wins = last_unfocused[k] < i && last_modal[k] >= i;
                    Some(if prover_wins == (player == PROVER) {
                        0
                    } else {
                        INF
                    })
                }
                _ => match leaf(w) {
                    Some(x) => {
                        value[w] = x;
                        state[w] = DONE;
                        Some(x)
                    }
                    None => {
                        push(
                            w,
                            &mut stack,
                            &mut last_unfocused,
                            &mut last_modal,
                            &mut state,
                            &mut depth_of,
                        );
                        None
                    }
                },
            };
            if let Some(x) = contribution {
                let top = stack.last_mut().unwrap();
                top.2 = combine(game.owner(v) == player, top.2, x);
            }
        }
        value
    }

    /// Frontier positions of the cheapest candidate strategy for `player`,
    /// or of the solver's strategy when `use_solver` is set.
    fn frontier(&self, player: Player, use_solver: bool) -> Vec<usize> {
        let sg = &self.search;
        let game = sg.game();
        let value = if use_solver {
            Vec::new()
        } else {
            self.estimate(player)
        };
        if !use_solver && value[sg.root()] == INF {
            return Vec::new();
        }
        let mut seen = vec![false; sg.len()];
        let mut queue = VecDeque::from([sg.root()]);
        let mut out = Vec::new();
        seen[sg.root()] = true;
        while let Some(v) = queue.pop_front() {
            if self.settled(v) {
                continue;
            }
            if sg.is_frontier(v) {
                out.push(v);
                continue;
            }
            let succ = game.successors(v);
            let next: Vec<usize> = if game.owner(v) == player {
                let pick = if use_solver {
                    if player == PROVER {
                        self.optimistic.choice(v)
                    } else {
                        self.pessimistic.choice(v)
                    }
                } else if player == PROVER {
                    succ.iter()
                        .copied()
                        .min_by_key(|&w| (value[w], prover_rank(sg.record_at(w).unwrap())))
                } else {
                    succ.iter().copied().min_by_key(|&w| value[w])
                };
                pick.into_iter().collect()
            } else if use_solver {
                succ.to_vec()
            } else {
                succ.iter().copied().filter(|&w| value[w] > 0).collect()
            };
            for w in next {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// Expands the frontier of the candidate strategies and re-solves.
    pub fn step(&mut self) -> Result<Status, SearchError> {
        let status = self.status();
        if status != Status::Open {
            return Ok(status);
        }
        let before = self.search.len();
        let target = (2 * before).max(before + 256);
        let mut first = true;
        // re-read the candidates on the grown game until it has doubled,
        // keeping the last solutions
        while self.search.len() < target {
            let mut batch = Vec::new();
            if self.grow_proofs {
                batch.extend(self.frontier(PROVER, false));
            }
            if self.grow_refutations {
                batch.extend(self.frontier(REFUTER, false));
            }
            if batch.is_empty() && first {
                if self.grow_proofs {
                    batch.extend(self.frontier(PROVER, true));
                }
                if self.grow_refutations || batch.is_empty() {
                    batch.extend(self.frontier(REFUTER, true));
                }
                assert!(!batch.is_empty(), "open search without frontier");
            }
            if batch.is_empty() {
                break;
            }
            batch.sort_unstable();
            batch.dedup();
            self.search.expand(&batch)?;
            first = false;
        }
        let (p, o) = Self::solutions(&self.search);
        self.pessimistic = p;
        self.optimistic = o;
        Ok(self.status())
    }

    pub fn run(&mut self) -> Result<Status, SearchError> {
        loop {
            let status = self.step()?;
            if status != Status::Open {
                return Ok(status);
            }
        }
    }

    pub fn into_outcome(self) -> Outcome {
        match self.status() {
            Status::Proved => Outcome::Proved(extract_proof(&self.search, &self.pessimistic)),
            Status::Refuted => Outcome::Refuted(Box::new(RefuterWitness {
                search: self.search,
                solution: self.optimistic,
            })),
            Status::Open => panic!("search is still open"),
        }
    }
}

/// A winning strategy for Refuter from the root of the search game. The
/// strategy never leaves the expanded part of the game.
pub struct RefuterWitness {
    pub search: SearchGame,
    pub solution: Solution,
}

impl RefuterWitness {
    /// Refuter's chosen premiss position at an instance position.
    pub fn choice(&self, v: usize) -> Option<usize> {
        self.solution.choice(v)
    }

    pub fn wins(&self, v: usize) -> bool {
        self.solution.winner(v) == REFUTER
    }
}

pub enum Outcome {
    Proved(Proof),
    Refuted(Box<RefuterWitness>),
}

impl Outcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, Outcome::Proved(_))
    }

    pub fn proof(&self) -> Option<&Proof> {
        match self {
            Outcome::Proved(p) => Some(p),
            Outcome::Refuted(_) => None,
        }
    }
}

/// Decides `root` by solving the search game.
///
/// A small model falsifying the root is looked for first. In phased mode
/// without one, the guided game is searched, and a Prover win there is a
/// proof; phased proofs cut on every formula and are exponentially large,
/// so the phased game itself only grows Refuter's candidates. In full mode
/// the full game is searched for both players. When there is a falsifying
/// model, the positions Refuter meets by following it are expanded up
/// front, and the game is then grown only where the candidate strategies
/// need it.
pub fn prove(
    ctx: Arc<Context>,
    root: &Sequent,
    config: SearchConfig,
) -> Result<Outcome, SearchError> {
    let falsifier = hint::find_falsifier(&ctx, root);
    if config.mode == Mode::Phased && falsifier.is_none() {
        let guided_config = SearchConfig {
            max_positions: config.guided_positions.min(config.max_positions),
            ..config
        };
        let guided = SearchGame::new(ctx.clone(), root, GameKind::Guided, guided_config)?;
        let mut local = LocalSearch::new(guided, true, false);
        match local.run() {
            Ok(Status::Proved) => return Ok(local.into_outcome()),
            Ok(_) | Err(SearchError::Budget(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut game = SearchGame::new(ctx.clone(), root, config.mode.into(), config)?;
    if let Some((model, state)) = &falsifier {
        hint::explore(&mut game, model, *state)?;
    }
    let grow_proofs = config.mode == Mode::Full && falsifier.is_none();
    let mut local = LocalSearch::new(game, grow_proofs, true);
    local.run()?;
    Ok(local.into_outcome())
}

/// Proves the one-member sequent `{φ^f}` over the context of `φ`.
pub fn prove_formula(
    phi: &crate::syntax::Formula,
    config: SearchConfig,
) -> Result<Outcome, SearchError> {
    let ctx = Arc::new(Context::new([phi.clone()]).map_err(|_| SearchError::ContextMismatch)?);
    let id = ctx.id_of(phi).expect("seed in context");
    let root = Sequent::from_members(&ctx, [Member::Formula(id, crate::calculus::Annotation::F)]);
    prove(ctx, &root, config)
}

/// The rule label of an inference node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inference {
    pub rule: Rule,
    pub principal: Option<Member>,
    pub auxiliary: Option<Member>,
    pub action: Option<Action>,
    pub keeps_principal: bool,
}

/// A node is either an inference, with one child per premiss, or a bud
/// whose `backedge` points at a node carrying the same sequent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofNode {
    pub sequent: Sequent,
    pub inference: Option<Inference>,
    pub children: Vec<usize>,
    pub backedge: Option<usize>,
}

/// A finite proof graph. Children may be shared between parents; cycles
/// only pass through buds.
#[derive(Clone, Debug)]
pub struct Proof {
    pub ctx: Arc<Context>,
    pub root: usize,
    pub nodes: Vec<ProofNode>,
    /// The game the proof was read off.
    pub game: GameKind,
}

fn extract_proof(search: &SearchGame, solution: &Solution) -> Proof {
    let mut nodes: Vec<ProofNode> = Vec::new();
    let mut proof_of: HashMap<usize, usize> = HashMap::new();
    let mut on_stack: HashMap<usize, bool> = HashMap::new();
    // frames: (game position, proof node, premiss targets, next premiss)
    let mut stack: Vec<(usize, usize, Vec<usize>, usize)> = Vec::new();

    let open = |v: usize, nodes: &mut Vec<ProofNode>| -> (usize, Vec<usize>) {
        let inst = solution.choice(v).expect("prover wins here");
        let rec = search.record_at(inst).expect("instance position");
        nodes.push(ProofNode {
            sequent: search.sequent_at(v).clone(),
            inference: Some(Inference {
                rule: rec.rule,
                principal: rec.principal,
                auxiliary: rec.auxiliary,
                action: rec.action.clone(),
                keeps_principal: rec.keeps_principal,
            }),
            children: Vec::new(),
            backedge: None,
        });
        (nodes.len() - 1, rec.targets.clone())
    };

    let root = search.root();
    let (id, targets) = open(root, &mut nodes);
    proof_of.insert(root, id);
    on_stack.insert(root, true);
    stack.push((root, id, targets, 0));
    while let Some(frame) = stack.last_mut() {
        let (v, pid, targets, next) = (frame.0, frame.1, &frame.2, frame.3);
        if next == targets.len() {
            on_stack.insert(v, false);
            stack.pop();
            continue;
        }
        let w = targets[next];
        frame.3 += 1;
        if on_stack.get(&w) == Some(&true) {
            nodes.push(ProofNode {
                sequent: search.sequent_at(w).clone(),
                inference: None,
                children: Vec::new(),
                backedge: Some(proof_of[&w]),
            });
            let bud = nodes.len() - 1;
            nodes[pid].children.push(bud);
        } else if let Some(&done) = proof_of.get(&w) {
            nodes[pid].children.push(done);
        } else {
            let (cid, ctargets) = open(w, &mut nodes);
            nodes[pid].children.push(cid);
            proof_of.insert(w, cid);
            on_stack.insert(w, true);
            stack.push((w, cid, ctargets, 0));
        }
    }
    Proof {
        ctx: search.context().clone(),
        root: 0,
        nodes,
        game: search.kind(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofDefect {
    /// Child indices from the root, like `root/0/1`.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ProofDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn node_paths(proof: &Proof) -> Vec<Option<String>> {
    let mut paths: Vec<Option<String>> = vec![None; proof.nodes.len()];
    if proof.root >= proof.nodes.len() {
        return paths;
    }
    paths[proof.root] = Some("root".to_string());
    let mut queue = VecDeque::from([proof.root]);
    while let Some(v) = queue.pop_front() {
        let base = paths[v].clone().unwrap();
        for (k, &c) in proof.nodes[v].children.iter().enumerate() {
            if c < proof.nodes.len() && paths[c].is_none() {
                paths[c] = Some(format!("{base}/{k}"));
                queue.push_back(c);
            }
        }
    }
    paths
}

/// Checks a proof graph: leaves are axioms, every inference is a valid rule
/// application, buds point at equal sequents, every cycle stays in focus and
/// passes a modal rule.
pub fn verify_proof(proof: &Proof) -> Result<(), Vec<ProofDefect>> {
    let n = proof.nodes.len();
    let paths = node_paths(proof);
    let path = |v: usize| {
        paths
            .get(v)
            .cloned()
            .flatten()
            .unwrap_or_else(|| format!("node {v}"))
    };
    let mut defects = Vec::new();
    macro_rules! defect {
        ($v:expr, $m:expr) => {
            defects.push(ProofDefect {
                path: path($v),
                message: $m,
            })
        };
    }
    if proof.root >= n {
        return Err(vec![ProofDefect {
            path: "root".into(),
            message: format!("root {} out of range", proof.root),
        }]);
    }
    let calc = Calculus::new(&proof.ctx, TraceScope::All);
    for (v, node) in proof.nodes.iter().enumerate() {
        if node.sequent.context_size() != proof.ctx.len() {
            defect!(v, "sequent does not fit the context".into());
            continue;
        }
        if let Some(&bad) = node.children.iter().find(|&&c| c >= n) {
            defect!(v, format!("child {bad} out of range"));
            continue;
        }
        match (&node.inference, node.backedge) {
            (Some(_), Some(_)) => defect!(v, "node has both a rule and a back-edge".into()),
            (None, None) => defect!(v, "leaf is not an axiom".into()),
            (None, Some(t)) => {
                if t >= n {
                    defect!(v, format!("back-edge target {t} out of range"));
                } else if !node.children.is_empty() {
                    defect!(v, "bud has children".into());
                } else if proof.nodes[t].sequent != node.sequent {
                    defect!(
                        v,
                        format!("back-edge to {} with a different sequent", path(t))
                    );
                } else if proof.nodes[t].inference.is_none() {
                    defect!(
                        v,
                        format!("back-edge to {} which is not an inference", path(t))
                    );
                }
            }
            (Some(inf), None) => {
                let inst = RuleInstance {
                    conclusion: node.sequent.clone(),
                    rule: inf.rule,
                    principal: inf.principal,
                    auxiliary: inf.auxiliary,
                    action: inf.action.clone(),
                    keeps_principal: inf.keeps_principal,
                    premisses: node
                        .children
                        .iter()
                        .map(|&c| proof.nodes[c].sequent.clone())
                        .collect(),
                };
                if !calc.validate_instance(&inst) {
                    defect!(v, format!("invalid application of {}", inf.rule));
                }
            }
        }
    }
    if !defects.is_empty() {
        return Err(defects);
    }
    let mut graph = DiGraph::<usize, ()>::with_capacity(n, n);
    let ix: Vec<NodeIndex> = (0..n).map(|v| graph.add_node(v)).collect();
    let mut edges = Vec::new();
    for (v, node) in proof.nodes.iter().enumerate() {
        for &c in &node.children {
            edges.push((v, c));
        }
        if let Some(t) = node.backedge {
            edges.push((v, t));
        }
    }
    for &(a, b) in &edges {
        graph.add_edge(ix[a], ix[b], ());
    }
    let cyclic = |g: &DiGraph<usize, ()>, scc: &[NodeIndex]| {
        scc.len() > 1 || g.contains_edge(scc[0], scc[0])
    };
    for scc in tarjan_scc(&graph) {
        if !cyclic(&graph, &scc) {
            continue;
        }
        for &x in &scc {
            let v = graph[x];
            if !proof.nodes[v].sequent.has_focus() {
                defect!(v, "unfocused sequent on a cycle".into());
            }
        }
    }
    let is_modal =
        |v: usize| matches!(&proof.nodes[v].inference, Some(inf) if inf.rule == Rule::Modal);
    let mut local = DiGraph::<usize, ()>::new();
    let lix: Vec<Option<NodeIndex>> = (0..n)
        .map(|v| (!is_modal(v)).then(|| local.add_node(v)))
        .collect();
    for &(a, b) in &edges {
        if let (Some(x), Some(y)) = (lix[a], lix[b]) {
            local.add_edge(x, y, ());
        }
    }
    for scc in tarjan_scc(&local) {
        if cyclic(&local, &scc) {
            defect!(local[scc[0]], "cycle without a modal rule".into());
        }
    }
    if defects.is_empty() {
        Ok(())
    } else {
        Err(defects)
    }
}

#[derive(Serialize, Deserialize)]
struct ProofFile {
    context: Vec<String>,
    root: usize,
    nodes: Vec<NodeFile>,
    metadata: ProofMetadata,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    id: usize,
    sequent: String,
    rule: Option<String>,
    principal: Option<String>,
    auxiliary: Option<String>,
    action: Option<String>,
    keeps_principal: bool,
    children: Vec<usize>,
    backedge: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ProofMetadata {
    root_annotation: String,
    game: GameKind,
}

#[derive(Debug, thiserror::Error)]
pub enum ProofFileError {
    #[error("proof file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("proof file: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("proof file: context is not a canonical negation-closed set")]
    Context,
    #[error("proof file: node {0}: {1}")]
    Node(usize, String),
}

fn parse_member(ctx: &Context, text: &str) -> Result<Member, String> {
    let raw = parse_sequent(text).map_err(|e| e.to_string())?;
    if raw.len() != 1 {
        return Err(format!("expected one member in `{text}`"));
    }
    let s = intern_sequent(ctx, &raw).map_err(|e| e.to_string())?;
    let m = s.members().next().expect("one member");
    Ok(m)
}

impl Proof {
    pub fn to_json(&self) -> serde_json::Value {
        let ctx = &self.ctx;
        let file = ProofFile {
            context: ctx.formulas().iter().map(|f| f.to_string()).collect(),
            root: self.root,
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, node)| NodeFile {
                    id,
                    sequent: node.sequent.display(ctx),
                    rule: node.inference.as_ref().map(|i| i.rule.name().to_string()),
                    principal: node
                        .inference
                        .as_ref()
                        .and_then(|i| i.principal)
                        .map(|m| m.display(ctx)),
                    auxiliary: node
                        .inference
                        .as_ref()
                        .and_then(|i| i.auxiliary)
                        .map(|m| m.display(ctx)),
                    action: node
                        .inference
                        .as_ref()
                        .and_then(|i| i.action.as_ref())
                        .map(|a| a.to_string()),
                    keeps_principal: node.inference.as_ref().is_some_and(|i| i.keeps_principal),
                    children: node.children.clone(),
                    backedge: node.backedge,
                })
                .collect(),
            metadata: ProofMetadata {
                root_annotation: "f".into(),
                game: self.game,
            },
        };
        serde_json::to_value(file).expect("proof serializes")
    }

    pub fn from_json(text: &str) -> Result<Proof, ProofFileError> {
        let file: ProofFile = serde_json::from_str(text)?;
        let formulas = file
            .context
            .iter()
            .map(|s| parse_formula(s))
            .collect::<Result<Vec<_>, _>>()?;
        let ctx = Context::new(formulas.clone())?;
        if ctx.formulas() != &formulas[..] {
            return Err(ProofFileError::Context);
        }
        let mut nodes = Vec::with_capacity(file.nodes.len());
        for (k, nf) in file.nodes.iter().enumerate() {
            if nf.id != k {
                return Err(ProofFileError::Node(
                    k,
                    format!("id {} out of order", nf.id),
                ));
            }
            let err = |m: String| ProofFileError::Node(k, m);
            let raw = parse_sequent(&nf.sequent)?;
            let sequent = intern_sequent(&ctx, &raw).map_err(|e| err(e.to_string()))?;
            let inference = match &nf.rule {
                None => None,
                Some(name) => Some(Inference {
                    rule: Rule::from_name(name)
                        .ok_or_else(|| err(format!("unknown rule `{name}`")))?,
                    principal: nf
                        .principal
                        .as_deref()
                        .map(|t| parse_member(&ctx, t))
                        .transpose()
                        .map_err(err)?,
                    auxiliary: nf
                        .auxiliary
                        .as_deref()
                        .map(|t| parse_member(&ctx, t))
                        .transpose()
                        .map_err(err)?,
                    action: nf.action.as_deref().map(|a| {
                        let name = a.trim_end_matches('\'');
                        Action::with_direction(name, (a.len() - name.len()) % 2 == 1)
                    }),
                    keeps_principal: nf.keeps_principal,
                }),
            };
            nodes.push(ProofNode {
                sequent,
                inference,
                children: nf.children.clone(),
                backedge: nf.backedge,
            });
        }
        Ok(Proof {
            ctx: Arc::new(ctx),
            root: file.root,
            nodes,
            game: file.metadata.game,
        })
    }

    /// Graphviz rendering; back-edges are dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph proof {\n  node [shape=box, fontname=monospace];\n");
        for (v, node) in self.nodes.iter().enumerate() {
            let rule = node
                .inference
                .as_ref()
                .map(|i| i.rule.name())
                .unwrap_or("bud");
            let label =
                format!("{rule}\\n{}", node.sequent.display(&self.ctx)).replace('"', "\\\"");
            let _ = writeln!(out, "  n{v} [label=\"{label}\"];");
        }
        for (v, node) in self.nodes.iter().enumerate() {
            for c in &node.children {
                let _ = writeln!(out, "  n{v} -> n{c};");
            }
            if let Some(t) = node.backedge {
                let _ = writeln!(out, "  n{v} -> n{t} [style=dashed];");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn root_sequent(&self) -> &Sequent {
        &self.nodes[self.root].sequent
    }

    pub fn rule_count(&self, rule: Rule) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.inference.as_ref().is_some_and(|i| i.rule == rule))
            .count()
    }
}
