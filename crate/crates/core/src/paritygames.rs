//! Finite parity games with max-parity winning condition. Player 0 wins
//! infinite plays whose highest recurring priority is even; a player with no
//! move loses.

use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

#[derive(
    Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Player {
    /// Player 0, the even player.
    Even,
    /// Player 1, the odd player.
    Odd,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Even => Player::Odd,
            Player::Odd => Player::Even,
        }
    }

    pub fn of_priority(priority: u32) -> Player {
        if priority.is_multiple_of(2) {
            Player::Even
        } else {
            Player::Odd
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::Even => 0,
            Player::Odd => 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParityGame {
    owner: Vec<Player>,
    priority: Vec<u32>,
    edges: Vec<Vec<usize>>,
}

impl ParityGame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_position(&mut self, owner: Player, priority: u32) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.edges.push(Vec::new());
        self.owner.len() - 1
    }

    /// Adds a move. Duplicate moves are ignored.
    pub fn add_edge(&mut self, from: usize, to: usize) {
        assert!(to < self.len(), "edge target {to} out of range");
        if !self.edges[from].contains(&to) {
            self.edges[from].push(to);
        }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.priority[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.edges[v]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Graphviz rendering: player 0 positions are ellipses, player 1 boxes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph game {\n");
        for v in 0..self.len() {
            let shape = match self.owner[v] {
                Player::Even => "ellipse",
                Player::Odd => "box",
            };
            let _ = writeln!(
                out,
                "  n{v} [shape={shape}, label=\"{v}:{}\"];",
                self.priority[v]
            );
        }
        for (v, succ) in self.edges.iter().enumerate() {
            for w in succ {
                let _ = writeln!(out, "  n{v} -> n{w};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A positional strategy: at most one chosen successor per position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionalStrategy {
    choice: Vec<Option<usize>>,
}

impl PositionalStrategy {
    pub fn empty(len: usize) -> Self {
        PositionalStrategy {
            choice: vec![None; len],
        }
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.choice.get(v).copied().flatten()
    }

    pub fn set(&mut self, v: usize, to: usize) {
        self.choice[v] = Some(to);
    }

    pub fn clear(&mut self, v: usize) {
        self.choice[v] = None;
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    winner: Vec<Player>,
    strategy: PositionalStrategy,
}

impl Solution {
    pub fn winner(&self, v: usize) -> Player {
        self.winner[v]
    }

    pub fn winners(&self) -> &[Player] {
        &self.winner
    }

    pub fn region(&self, player: Player) -> Vec<usize> {
        (0..self.winner.len())
            .filter(|&v| self.winner[v] == player)
            .collect()
    }

    /// The winning move at `v`, defined when `v` belongs to its winner and
    /// has a successor.
    pub fn choice(&self, v: usize) -> Option<usize> {
        self.strategy.get(v)
    }

    /// The strategy of `player`, restricted to its winning region.
    pub fn strategy(&self, player: Player, game: &ParityGame) -> PositionalStrategy {
        let mut s = PositionalStrategy::empty(self.winner.len());
        for v in 0..self.winner.len() {
            if self.winner[v] == player && game.owner(v) == player {
                if let Some(w) = self.strategy.get(v) {
                    s.set(v, w);
                }
            }
        }
        s
    }
}

struct Solver<'a> {
    owner: &'a [Player],
    priority: &'a [u32],
    edges: &'a [Vec<usize>],
    preds: Vec<Vec<usize>>,
    strategy: Vec<Option<usize>>,
    result: Vec<Option<Player>>,
    // a position belongs to the subgame at depth k iff level >= k
    level: Vec<u32>,
    stamp: u32,
    mark: Vec<u32>,
    count_mark: Vec<u32>,
    count: Vec<usize>,
}

impl Solver<'_> {
    /// Attractor of `target` for `player` inside the subgame at `depth`,
    /// recording attractor moves for `player`. Members carry the returned
    /// stamp in `self.mark`.
    fn attractor(&mut self, depth: u32, target: &[usize], player: Player) -> (Vec<usize>, u32) {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut out = Vec::new();
        for &v in target {
            if self.level[v] >= depth && self.mark[v] != stamp {
                self.mark[v] = stamp;
                out.push(v);
            }
        }
        let mut head = 0;
        while head < out.len() {
            let w = out[head];
            head += 1;
            for i in 0..self.preds[w].len() {
                let v = self.preds[w][i];
                if self.level[v] < depth || self.mark[v] == stamp {
                    continue;
                }
                if self.owner[v] == player {
                    self.mark[v] = stamp;
                    self.strategy[v] = Some(w);
                    out.push(v);
                } else {
                    if self.count_mark[v] != stamp {
                        self.count_mark[v] = stamp;
                        self.count[v] = self.edges[v]
                            .iter()
                            .filter(|&&x| self.level[x] >= depth)
                            .count();
                    }
                    self.count[v] -= 1;
                    if self.count[v] == 0 {
                        self.mark[v] = stamp;
                        out.push(v);
                    }
                }
            }
        }
        (out, stamp)
    }

    /// Zielonka's algorithm on the subgame at `depth`, which must be a trap
    /// for both players with every position having a successor inside it.
    fn solve(&mut self, depth: u32, mut nodes: Vec<usize>) {
        loop {
            if nodes.is_empty() {
                return;
            }
            let d = nodes.iter().map(|&v| self.priority[v]).max().unwrap();
            let p = Player::of_priority(d);
            let top: Vec<usize> = nodes
                .iter()
                .copied()
                .filter(|&v| self.priority[v] == d)
                .collect();
            let (_, stamp) = self.attractor(depth, &top, p);
            let rest: Vec<usize> = nodes
                .iter()
                .copied()
                .filter(|&v| self.mark[v] != stamp)
                .collect();
            for &v in &rest {
                self.level[v] = depth + 1;
            }
            self.solve(depth + 1, rest.clone());
            for &v in &rest {
                self.level[v] = depth;
            }
            let opp: Vec<usize> = rest
                .iter()
                .copied()
                .filter(|&v| self.result[v] == Some(p.opponent()))
                .collect();
            if opp.is_empty() {
                for &v in &top {
                    if self.owner[v] == p {
                        self.strategy[v] = self.edges[v]
                            .iter()
                            .copied()
                            .find(|&w| self.level[w] >= depth);
                    }
                }
                for &v in &nodes {
                    self.result[v] = Some(p);
                }
                return;
            }
            let (back, _) = self.attractor(depth, &opp, p.opponent());
            for &v in &back {
                self.result[v] = Some(p.opponent());
                self.level[v] = depth - 1;
            }
            nodes.retain(|&v| self.level[v] >= depth);
        }
    }
}

/// Solves the game with Zielonka's recursive algorithm. Winning regions
/// partition the positions; the returned moves are winning for the owner of
/// each position inside its region.
pub fn solve(game: &ParityGame) -> Solution {
    let n = game.len();
    // Dead ends are redirected to sinks won by the other player.
    let even_sink = n;
    let odd_sink = n + 1;
    let mut owner = game.owner.clone();
    let mut priority = game.priority.clone();
    let mut edges = game.edges.clone();
    owner.extend([Player::Even, Player::Even]);
    priority.extend([0, 1]);
    edges.push(vec![even_sink]);
    edges.push(vec![odd_sink]);
    for v in 0..n {
        if edges[v].is_empty() {
            edges[v].push(match owner[v] {
                Player::Even => odd_sink,
                Player::Odd => even_sink,
            });
        }
    }
    let mut preds = vec![Vec::new(); n + 2];
    for (v, succ) in edges.iter().enumerate() {
        for &w in succ {
            preds[w].push(v);
        }
    }
    let mut solver = Solver {
        owner: &owner,
        priority: &priority,
        edges: &edges,
        preds,
        strategy: vec![None; n + 2],
        result: vec![None; n + 2],
        level: vec![1; n + 2],
        stamp: 0,
        mark: vec![0; n + 2],
        count_mark: vec![0; n + 2],
        count: vec![0; n + 2],
    };
    solver.solve(1, (0..n + 2).collect());
    let winner: Vec<Player> = solver.result[..n]
        .iter()
        .map(|w| w.expect("every position solved"))
        .collect();
    let mut strategy = PositionalStrategy::empty(n);
    for v in 0..n {
        if owner[v] == winner[v] {
            if let Some(w) = solver.strategy[v] {
                if w < n {
                    strategy.set(v, w);
                }
            }
        }
    }
    Solution { winner, strategy }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StrategyViolation {
    #[error("position {0} is not in the game")]
    OutOfRange(usize),
    #[error("no move chosen at position {0}")]
    Undefined(usize),
    #[error("chosen move {0} -> {1} is not an edge")]
    NotAMove(usize, usize),
    #[error("move {0} -> {1} leaves the region")]
    LeavesRegion(usize, usize),
    #[error("player is stuck at position {0}")]
    Stuck(usize),
    #[error("a cycle through position {0} has losing maximal priority {1}")]
    LosingCycle(usize, u32),
}

/// Checks that `strategy` wins every play for `player` from every position
/// of `region`.
pub fn verify_strategy(
    game: &ParityGame,
    player: Player,
    strategy: &PositionalStrategy,
    region: &[usize],
) -> Result<(), StrategyViolation> {
    let n = game.len();
    let mut inside = vec![false; n];
    for &v in region {
        if v >= n {
            return Err(StrategyViolation::OutOfRange(v));
        }
        inside[v] = true;
    }
    let mut kept: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &v in region {
        if game.owner(v) == player {
            if game.successors(v).is_empty() {
                return Err(StrategyViolation::Stuck(v));
            }
            let w = strategy.get(v).ok_or(StrategyViolation::Undefined(v))?;
            if !game.successors(v).contains(&w) {
                return Err(StrategyViolation::NotAMove(v, w));
            }
            if !inside[w] {
                return Err(StrategyViolation::LeavesRegion(v, w));
            }
            kept[v].push(w);
        } else {
            for &w in game.successors(v) {
                if !inside[w] {
                    return Err(StrategyViolation::LeavesRegion(v, w));
                }
                kept[v].push(w);
            }
        }
    }
    let mut bad: Vec<u32> = region
        .iter()
        .map(|&v| game.priority(v))
        .filter(|&q| Player::of_priority(q) != player)
        .collect();
    bad.sort_unstable();
    bad.dedup();
    for q in bad {
        let mut graph = DiGraph::<usize, ()>::new();
        let mut node = vec![None; n];
        for &v in region {
            if game.priority(v) <= q {
                node[v] = Some(graph.add_node(v));
            }
        }
        for &v in region {
            for &w in &kept[v] {
                if let (Some(a), Some(b)) = (node[v], node[w]) {
                    graph.add_edge(a, b, ());
                }
            }
        }
        for scc in tarjan_scc(&graph) {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            if !cyclic {
                continue;
            }
            if let Some(&ix) = scc.iter().find(|&&ix| game.priority(graph[ix]) == q) {
                return Err(StrategyViolation::LosingCycle(graph[ix], q));
            }
        }
    }
    Ok(())
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("game has {size} positions, above the brute-force bound {bound}")]
pub struct BoundExceeded {
    pub size: usize,
    pub bound: usize,
}

pub const BRUTE_FORCE_BOUND: usize = 10;

fn strategy_space(game: &ParityGame, player: Player) -> Vec<Vec<Option<usize>>> {
    let mut all = vec![vec![None; game.len()]];
    for v in 0..game.len() {
        if game.owner(v) != player || game.successors(v).is_empty() {
            continue;
        }
        let mut next = Vec::with_capacity(all.len() * game.successors(v).len());
        for partial in &all {
            for &w in game.successors(v) {
                let mut s = partial.clone();
                s[v] = Some(w);
                next.push(s);
            }
        }
        all = next;
    }
    all
}

fn play_winner(
    game: &ParityGame,
    start: usize,
    s0: &[Option<usize>],
    s1: &[Option<usize>],
) -> Player {
    let mut seen = vec![usize::MAX; game.len()];
    let mut path = Vec::new();
    let mut v = start;
    loop {
        if seen[v] != usize::MAX {
            let cycle_max = path[seen[v]..]
                .iter()
                .map(|&u| game.priority(u))
                .max()
                .unwrap();
            return Player::of_priority(cycle_max);
        }
        seen[v] = path.len();
        path.push(v);
        let next = match game.owner(v) {
            Player::Even => s0[v],
            Player::Odd => s1[v],
        };
        match next {
            Some(w) => v = w,
            None => return game.owner(v).opponent(),
        }
    }
}

/// Winner of each position by enumerating all pairs of positional
/// strategies. Exponential; only for small games.
pub fn brute_force_winner(game: &ParityGame, bound: usize) -> Result<Vec<Player>, BoundExceeded> {
    if game.len() > bound {
        return Err(BoundExceeded {
            size: game.len(),
            bound,
        });
    }
    let zero = strategy_space(game, Player::Even);
    let one = strategy_space(game, Player::Odd);
    Ok((0..game.len())
        .map(|v| {
            let even_wins = zero.iter().any(|s0| {
                one.iter()
                    .all(|s1| play_winner(game, v, s0, s1) == Player::Even)
            });
            if even_wins {
                Player::Even
            } else {
                Player::Odd
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_game(rng: &mut StdRng, n: usize, max_priority: u32) -> ParityGame {
        let mut g = ParityGame::new();
        for _ in 0..n {
            let owner = if rng.gen_bool(0.5) {
                Player::Even
            } else {
                Player::Odd
            };
            g.add_position(owner, rng.gen_range(0..=max_priority));
        }
        for v in 0..n {
            for _ in 0..rng.gen_range(0..=3) {
                g.add_edge(v, rng.gen_range(0..n));
            }
        }
        g
    }

    #[test]
    fn self_loop_even() {
        let mut g = ParityGame::new();
        let v = g.add_position(Player::Even, 2);
        g.add_edge(v, v);
        let s = solve(&g);
        assert_eq!(s.winners(), &[Player::Even]);
        assert_eq!(s.choice(v), Some(v));
        assert_eq!(brute_force_winner(&g, 10).unwrap(), vec![Player::Even]);
    }

    #[test]
    fn stuck_owner_loses() {
        let mut g = ParityGame::new();
        g.add_position(Player::Even, 0);
        assert_eq!(solve(&g).winners(), &[Player::Odd]);
        assert_eq!(brute_force_winner(&g, 10).unwrap(), vec![Player::Odd]);
    }

    #[test]
    fn chain_into_odd_loop() {
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Even, 2);
        let b = g.add_position(Player::Even, 0);
        let c = g.add_position(Player::Odd, 1);
        g.add_edge(a, b);
        g.add_edge(b, c);
        g.add_edge(c, c);
        let expected = vec![Player::Odd; 3];
        assert_eq!(brute_force_winner(&g, 10).unwrap(), expected);
        assert_eq!(solve(&g).winners(), &expected[..]);
    }

    #[test]
    fn two_cycles_choice() {
        // v0 (even) can loop through v1 (priority 1) or v2 (priority 2)
        let mut g = ParityGame::new();
        let v0 = g.add_position(Player::Even, 0);
        let v1 = g.add_position(Player::Odd, 1);
        let v2 = g.add_position(Player::Odd, 2);
        g.add_edge(v0, v1);
        g.add_edge(v0, v2);
        g.add_edge(v1, v0);
        g.add_edge(v2, v0);
        let mut good = PositionalStrategy::empty(3);
        good.set(v0, v2);
        assert!(verify_strategy(&g, Player::Even, &good, &[v0, v2]).is_ok());
        let mut bad = PositionalStrategy::empty(3);
        bad.set(v0, v1);
        assert!(matches!(
            verify_strategy(&g, Player::Even, &bad, &[v0, v1]),
            Err(StrategyViolation::LosingCycle(_, 1))
        ));
        let s = solve(&g);
        assert_eq!(s.winner(v0), Player::Even);
        assert_eq!(s.choice(v0), Some(v2));
    }

    #[test]
    fn strategy_into_opponent_region_rejected() {
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Even, 0);
        let b = g.add_position(Player::Odd, 1);
        let c = g.add_position(Player::Even, 2);
        g.add_edge(a, b);
        g.add_edge(a, c);
        g.add_edge(b, b);
        g.add_edge(c, c);
        let s = solve(&g);
        assert_eq!(s.region(Player::Even), vec![a, c]);
        let mut bad = s.strategy(Player::Even, &g);
        bad.set(a, b);
        assert_eq!(
            verify_strategy(&g, Player::Even, &bad, &[a, c]),
            Err(StrategyViolation::LeavesRegion(a, b))
        );
    }

    #[test]
    fn brute_force_bound() {
        let mut g = ParityGame::new();
        for _ in 0..11 {
            g.add_position(Player::Even, 0);
        }
        assert!(brute_force_winner(&g, BRUTE_FORCE_BOUND).is_err());
    }

    #[test]
    fn solver_matches_oracle_and_strategies_verify() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=7);
            let g = random_game(&mut rng, n, 3);
            let s = solve(&g);
            assert_eq!(
                s.winners(),
                &brute_force_winner(&g, 10).unwrap()[..],
                "{}",
                g.to_dot()
            );
            for p in [Player::Even, Player::Odd] {
                verify_strategy(&g, p, &s.strategy(p, &g), &s.region(p)).unwrap();
            }
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let mut rng = StdRng::seed_from_u64(11);
        let g = random_game(&mut rng, 40, 4);
        let a = solve(&g);
        let b = solve(&g);
        assert_eq!(a.winners(), b.winners());
        for v in 0..g.len() {
            assert_eq!(a.choice(v), b.choice(v));
        }
    }

    #[test]
    fn dot_mentions_every_position() {
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Even, 3);
        let b = g.add_position(Player::Odd, 0);
        g.add_edge(a, b);
        let dot = g.to_dot();
        assert!(dot.contains("n0 [shape=ellipse, label=\"0:3\"]"));
        assert!(dot.contains("n1 [shape=box"));
        assert!(dot.contains("n0 -> n1"));
    }
}
