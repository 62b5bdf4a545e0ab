use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use super::{Action, Fixpoint, Formula, Node, SyntaxError};

/// Index of a formula inside a [`Context`]. Ids are ordered by formula size,
/// then by the structural order on formulas.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FormulaId(pub u32);

impl FormulaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One layer of a formula, with children resolved to ids. Fixpoints point at
/// their unfolding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Prop(Arc<str>),
    NegProp(Arc<str>),
    Or(FormulaId, FormulaId),
    And(FormulaId, FormulaId),
    Diamond(Action, FormulaId),
    Box(Action, FormulaId),
    Fix(Fixpoint, FormulaId),
}

/// A finite negation-closed set of formulas, interned.
#[derive(Clone, Debug)]
pub struct Context {
    formulas: Vec<Formula>,
    shapes: Vec<Shape>,
    negations: Vec<FormulaId>,
    index: HashMap<Formula, FormulaId>,
    modal: HashMap<(bool, Action, FormulaId), FormulaId>,
}

impl Context {
    /// The least negation-closed set containing `seeds`.
    pub fn new(seeds: impl IntoIterator<Item = Formula>) -> Result<Context, SyntaxError> {
        let mut seen: HashSet<Formula> = HashSet::new();
        let mut stack: Vec<Formula> = Vec::new();
        for seed in seeds {
            if !seed.is_closed() {
                return Err(SyntaxError::Open {
                    formula: seed.to_string(),
                });
            }
            if !seed.is_alternation_free() {
                return Err(SyntaxError::AlternationViolation {
                    formula: seed.to_string(),
                    pos: 0,
                });
            }
            stack.push(seed);
        }
        while let Some(phi) = stack.pop() {
            if !seen.insert(phi.clone()) {
                continue;
            }
            stack.push(phi.negate());
            stack.extend(phi.closure_successors());
        }
        let mut formulas: Vec<Formula> = seen.into_iter().collect();
        formulas.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
        let index: HashMap<Formula, FormulaId> = formulas
            .iter()
            .enumerate()
            .map(|(i, phi)| (phi.clone(), FormulaId(i as u32)))
            .collect();
        let id = |phi: &Formula| index[phi];
        let mut shapes = Vec::with_capacity(formulas.len());
        let mut negations = Vec::with_capacity(formulas.len());
        let mut modal = HashMap::new();
        for (i, phi) in formulas.iter().enumerate() {
            let shape = match phi.node() {
                Node::Prop(p) => Shape::Prop(p.clone()),
                Node::NegProp(p) => Shape::NegProp(p.clone()),
                Node::Var(_) => unreachable!("closed formulas only"),
                Node::Or(l, r) => Shape::Or(id(l), id(r)),
                Node::And(l, r) => Shape::And(id(l), id(r)),
                Node::Diamond(a, b) => {
                    modal.insert((false, a.clone(), id(b)), FormulaId(i as u32));
                    Shape::Diamond(a.clone(), id(b))
                }
                Node::Box(a, b) => {
                    modal.insert((true, a.clone(), id(b)), FormulaId(i as u32));
                    Shape::Box(a.clone(), id(b))
                }
                Node::Fix(k, _) => Shape::Fix(*k, id(&phi.unfold().expect("fixpoint"))),
            };
            shapes.push(shape);
            negations.push(id(&phi.negate()));
        }
        Ok(Context {
            formulas,
            shapes,
            negations,
            index,
            modal,
        })
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = FormulaId> + '_ {
        (0..self.formulas.len() as u32).map(FormulaId)
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn formula(&self, id: FormulaId) -> &Formula {
        &self.formulas[id.index()]
    }

    pub fn shape(&self, id: FormulaId) -> &Shape {
        &self.shapes[id.index()]
    }

    pub fn negation(&self, id: FormulaId) -> FormulaId {
        self.negations[id.index()]
    }

    pub fn id_of(&self, phi: &Formula) -> Option<FormulaId> {
        self.index.get(phi).copied()
    }

    pub fn contains(&self, phi: &Formula) -> bool {
        self.index.contains_key(phi)
    }

    /// The id of `[a]body`, if it belongs to the context.
    pub fn box_of(&self, action: &Action, body: FormulaId) -> Option<FormulaId> {
        self.modal.get(&(true, action.clone(), body)).copied()
    }

    /// The id of `<a>body`, if it belongs to the context.
    pub fn diamond_of(&self, action: &Action, body: FormulaId) -> Option<FormulaId> {
        self.modal.get(&(false, action.clone(), body)).copied()
    }

    pub fn is_fix(&self, id: FormulaId, kind: Fixpoint) -> bool {
        matches!(self.shape(id), Shape::Fix(k, _) if *k == kind)
    }

    pub fn is_mu(&self, id: FormulaId) -> bool {
        self.is_fix(id, Fixpoint::Mu)
    }

    pub fn is_nu(&self, id: FormulaId) -> bool {
        self.is_fix(id, Fixpoint::Nu)
    }

    /// Action of a modal formula.
    pub fn modality(&self, id: FormulaId) -> Option<&Action> {
        match self.shape(id) {
            Shape::Diamond(a, _) | Shape::Box(a, _) => Some(a),
            _ => None,
        }
    }

    /// Actions of all modalities in the context.
    pub fn actions(&self) -> Vec<Action> {
        let mut out: Vec<Action> = self
            .ids()
            .filter_map(|i| self.modality(i).cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Proposition names occurring in the context.
    pub fn props(&self) -> Vec<Arc<str>> {
        let mut out: Vec<Arc<str>> = self
            .shapes
            .iter()
            .filter_map(|s| match s {
                Shape::Prop(p) | Shape::NegProp(p) => Some(p.clone()),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn display(&self, id: FormulaId) -> String {
        self.formula(id).to_string()
    }
}

/// The least finite negation-closed set containing `seeds`.
pub fn negation_closed_context(
    seeds: impl IntoIterator<Item = Formula>,
) -> Result<Context, SyntaxError> {
    Context::new(seeds)
}

#[cfg(test)]
mod tests {
    use super::super::parse_formula;
    use super::*;
    use std::collections::BTreeSet;

    fn f(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    fn as_set(ctx: &Context) -> BTreeSet<Formula> {
        ctx.formulas().iter().cloned().collect()
    }

    #[test]
    fn zigzag_context() {
        let ctx = Context::new([f("<a>p"), f("nu x. <a><a'>x")]).unwrap();
        let expected: BTreeSet<Formula> = [
            "<a>p",
            "p",
            "nu x. <a><a'>x",
            "<a><a'>nu x. <a><a'>x",
            "<a'>nu x. <a><a'>x",
            "[a]~p",
            "~p",
            "mu x. [a][a']x",
            "[a][a']mu x. [a][a']x",
            "[a']mu x. [a][a']x",
        ]
        .into_iter()
        .map(f)
        .collect();
        assert_eq!(as_set(&ctx), expected);
    }

    #[test]
    fn single_atom_context() {
        let ctx = Context::new([f("p")]).unwrap();
        assert_eq!(as_set(&ctx), [f("p"), f("~p")].into_iter().collect());
    }

    #[test]
    fn back_to_p_context_has_fourteen_members() {
        let ctx = Context::new([f("mu x. <a'>x | p"), f("nu y. [a]y & mu x. <a'>x | p")]).unwrap();
        assert_eq!(ctx.len(), 14);
        assert!(ctx.contains(&f("<a>mu y. <a>y | ~(mu x. <a'>x | p)")));
    }

    #[test]
    fn tables_are_consistent() {
        let ctx = Context::new([f("~p | nu y.([a]y & mu x.(<a'>x | p))")]).unwrap();
        for id in ctx.ids() {
            assert_eq!(ctx.negation(ctx.negation(id)), id);
            assert_eq!(ctx.id_of(ctx.formula(id)), Some(id));
            if let Shape::Box(a, b) = ctx.shape(id) {
                assert_eq!(ctx.box_of(a, *b), Some(id));
                assert_eq!(ctx.diamond_of(a, ctx.negation(*b)), Some(ctx.negation(id)));
            }
            if let Shape::Fix(_, u) = ctx.shape(id) {
                assert_eq!(*ctx.formula(*u), ctx.formula(id).unfold().unwrap());
            }
        }
        // ids follow size order
        for w in ctx.formulas().windows(2) {
            assert!(w[0].size() <= w[1].size());
        }
    }

    #[test]
    fn rejects_open_seed() {
        assert!(matches!(
            Context::new([Formula::var(0)]),
            Err(SyntaxError::Open { .. })
        ));
    }
}
