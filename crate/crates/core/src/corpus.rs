//! Test corpora: hand-checked golden sequents and seeded random generators
//! for games, formulas, models and sequents.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::calculus::{intern_sequent, parse_sequent, Annotation, Member, Sequent};
use crate::paritygames::{ParityGame, Player};
use crate::semantics::KripkeModel;
use crate::syntax::{Action, Context, Fixpoint, Formula, SyntaxError};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Expect {
    Provable,
    Refutable,
}

/// A sequent whose status was settled by hand.
#[derive(Copy, Clone, Debug)]
pub struct GoldenCase {
    pub name: &'static str,
    pub sequent: &'static str,
    pub expect: Expect,
    /// Decided by the full game within a few hundred thousand positions.
    pub small: bool,
}

impl GoldenCase {
    pub fn context_and_root(
        &self,
    ) -> Result<(Arc<Context>, Sequent), crate::calculus::CalculusError> {
        let raw = parse_sequent(self.sequent)?;
        let ctx = Arc::new(crate::calculus::context_for(&raw)?);
        let root = intern_sequent(&ctx, &raw)?;
        Ok((ctx, root))
    }
}

const fn case(
    name: &'static str,
    sequent: &'static str,
    expect: Expect,
    small: bool,
) -> GoldenCase {
    GoldenCase {
        name,
        sequent,
        expect,
        small,
    }
}

/// The golden corpus. The first two cases are the worked examples: `p`
/// implies that every `a`-successor can get back to a `p`-state, and a state
/// with an `a`-successor has an infinite `a`/`a'` zig-zag.
pub fn golden() -> Vec<GoldenCase> {
    use Expect::*;
    vec![
        case(
            "back-to-p",
            "~p [f], nu y.([a]y & mu x.(<a'>x | p)) [f]",
            Provable,
            false,
        ),
        case("zigzag", "[a]~p [f], nu x.<a><a'>x [f]", Provable, false),
        case("excluded-middle", "p [f], ~p [f]", Provable, true),
        case("nu-top", "nu x. x [f]", Provable, true),
        case("box-nu-top", "nu x. [a]x [f]", Provable, true),
        case("box-or-diamond", "[a]p [f], <a>~p [f]", Provable, true),
        case("back-and-forth", "~p | [a]<a'>p [f]", Provable, true),
        case("forth-and-back", "[a]<a'>~p | p [f]", Provable, true),
        case("atom", "p [f]", Refutable, true),
        case("mu-bottom", "mu x. x [f]", Refutable, true),
        case("diamond-top", "<a>(nu x. x) [f]", Refutable, false),
        case("well-founded", "mu x. [a]x [f]", Refutable, false),
        case("box-atom", "[a]p [f]", Refutable, false),
        case("no-return", "p | [a]<a'>p [f]", Refutable, false),
        case(
            "loop-or-root",
            "nu x.(p & <a>x) | mu y.([a']y | q) [f]",
            Refutable,
            false,
        ),
        case(
            "two-actions",
            "nu x.(<a>x & [b]x & p) | mu y.(<a'>y & ([b']y | q)) [f]",
            Refutable,
            false,
        ),
        case(
            "reach-back",
            "~q | [a]mu x.(<a'>x | q) [f]",
            Provable,
            false,
        ),
        case("diamond-split", "<a>p [f], <a>~p [f]", Refutable, false),
    ]
}

/// A random game on `n` positions with priorities `0..=max_priority`;
/// every position gets up to two successors and may be a dead end.
pub fn random_game(rng: &mut StdRng, n: usize, max_priority: u32) -> ParityGame {
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
        let k = rng.gen_range(0..=2);
        for _ in 0..k {
            let w = rng.gen_range(0..n);
            g.add_edge(v, w);
        }
    }
    g
}

/// Parameters of the random formula generator.
#[derive(Clone, Debug)]
pub struct FormulaShape {
    pub props: Vec<String>,
    /// Base action names; converses are drawn as well.
    pub actions: Vec<String>,
    pub depth: u32,
    /// Upper bound on the negation-closed context.
    pub max_context: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape {
            props: vec!["p".into(), "q".into()],
            actions: vec!["a".into()],
            depth: 4,
            max_context: 20,
        }
    }
}

fn random_action(rng: &mut StdRng, shape: &FormulaShape) -> Action {
    let name = shape.actions.choose(rng).expect("at least one action");
    Action::with_direction(name, rng.gen_bool(0.4))
}

fn grow(rng: &mut StdRng, shape: &FormulaShape, depth: u32, bound: &mut Vec<Fixpoint>) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        if !bound.is_empty() && rng.gen_bool(0.5) {
            return Formula::var(rng.gen_range(0..bound.len() as u32));
        }
        let p = shape.props.choose(rng).expect("at least one proposition");
        return if rng.gen_bool(0.5) {
            Formula::prop(p)
        } else {
            Formula::neg_prop(p)
        };
    }
    match rng.gen_range(0..6) {
        0 => Formula::or(
            grow(rng, shape, depth - 1, bound),
            grow(rng, shape, depth - 1, bound),
        ),
        1 => Formula::and(
            grow(rng, shape, depth - 1, bound),
            grow(rng, shape, depth - 1, bound),
        ),
        2 => Formula::diamond(
            random_action(rng, shape),
            grow(rng, shape, depth - 1, bound),
        ),
        3 => Formula::boxed(
            random_action(rng, shape),
            grow(rng, shape, depth - 1, bound),
        ),
        _ => {
            // one fixpoint kind per nesting keeps the formula alternation-free
            let kind = match bound.last() {
                Some(&k) => k,
                None if rng.gen_bool(0.5) => Fixpoint::Mu,
                None => Fixpoint::Nu,
            };
            bound.push(kind);
            let body = grow(rng, shape, depth - 1, bound);
            bound.pop();
            Formula::fix(kind, body)
        }
    }
}

/// A closed alternation-free formula whose context has at most
/// `shape.max_context` members.
pub fn random_formula(rng: &mut StdRng, shape: &FormulaShape) -> Formula {
    loop {
        let phi = grow(rng, shape, shape.depth, &mut Vec::new());
        if !phi.is_closed() || !phi.is_alternation_free() {
            continue;
        }
        match Context::new([phi.clone()]) {
            Ok(ctx) if ctx.len() <= shape.max_context => return phi,
            _ => continue,
        }
    }
}

/// A random model with `n` states over the given propositions and base
/// actions.
pub fn random_model(
    rng: &mut StdRng,
    n: usize,
    props: &[String],
    actions: &[String],
    edge_probability: f64,
) -> KripkeModel {
    let mut m = KripkeModel::with_states(n);
    for a in actions {
        let action = Action::new(a);
        for s in 0..n {
            for t in 0..n {
                if rng.gen_bool(edge_probability) {
                    m.add_edge(&action, s, t);
                }
            }
        }
    }
    for p in props {
        for s in 0..n {
            if rng.gen_bool(0.5) {
                m.set_true(p, s);
            }
        }
    }
    m
}

/// A random sequent of one to `max_members` focused formulas, with its
/// context.
pub fn random_sequent(
    rng: &mut StdRng,
    shape: &FormulaShape,
    max_members: usize,
) -> Result<(Arc<Context>, Sequent), SyntaxError> {
    let k = rng.gen_range(1..=max_members.max(1));
    let formulas: Vec<Formula> = (0..k).map(|_| random_formula(rng, shape)).collect();
    let ctx = Arc::new(Context::new(formulas.clone())?);
    let root = Sequent::from_members(
        &ctx,
        formulas.iter().map(|phi| {
            Member::Formula(
                ctx.id_of(phi).expect("seed is in its context"),
                Annotation::F,
            )
        }),
    );
    Ok((ctx, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn golden_cases_parse() {
        for case in golden() {
            case.context_and_root()
                .unwrap_or_else(|e| panic!("{}: {e}", case.name));
        }
    }

    #[test]
    fn random_formulas_respect_shape() {
        let mut rng = StdRng::seed_from_u64(7);
        let shape = FormulaShape::default();
        for _ in 0..200 {
            let phi = random_formula(&mut rng, &shape);
            assert!(phi.is_closed() && phi.is_alternation_free());
            assert!(Context::new([phi]).unwrap().len() <= shape.max_context);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let shape = FormulaShape::default();
        let a = random_formula(&mut StdRng::seed_from_u64(3), &shape);
        let b = random_formula(&mut StdRng::seed_from_u64(3), &shape);
        assert_eq!(a, b);
    }
}
