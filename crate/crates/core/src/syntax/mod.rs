//! Formulas of the two-way alternation-free modal mu-calculus.
//!
//! Formulas are kept in negation normal form. Bound variables are stored as
//! de Bruijn indices, so two formulas are equal exactly when they agree up to
//! renaming of bound variables. Names for bound variables only appear when a
//! formula is rendered, and are then chosen canonically from the binder depth.

mod context;
pub(crate) mod parse;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

pub use context::{negation_closed_context, Context, FormulaId, Shape};
pub use parse::parse_formula;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("negated occurrence of bound variable `{name}` at byte {pos}")]
    NegatedVariable { name: String, pos: usize },
    #[error("fixpoint at byte {pos} is not alternation free: {formula}")]
    AlternationViolation { formula: String, pos: usize },
    #[error("formula has free fixpoint variables: {formula}")]
    Open { formula: String },
    #[error("not a fixpoint formula: {formula}")]
    NotFixpoint { formula: String },
}

/// An atomic action together with its direction. `a'` is the converse of `a`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Action {
    name: Arc<str>,
    converse: bool,
}

impl Action {
    pub fn new(name: &str) -> Self {
        Action {
            name: Arc::from(name),
            converse: false,
        }
    }

    pub fn with_direction(name: &str, converse: bool) -> Self {
        Action {
            name: Arc::from(name),
            converse,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_converse(&self) -> bool {
        self.converse
    }

    pub fn converse(&self) -> Action {
        Action {
            name: self.name.clone(),
            converse: !self.converse,
        }
    }

    /// The forward action with the same name.
    pub fn base(&self) -> Action {
        Action {
            name: self.name.clone(),
            converse: false,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.converse {
            write!(f, "{}'", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Fixpoint {
    Mu,
    Nu,
}

impl Fixpoint {
    pub fn dual(self) -> Fixpoint {
        match self {
            Fixpoint::Mu => Fixpoint::Nu,
            Fixpoint::Nu => Fixpoint::Mu,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Node {
    Prop(Arc<str>),
    NegProp(Arc<str>),
    /// Bound variable, as a de Bruijn index counting enclosing binders.
    Var(u32),
    Or(Formula, Formula),
    And(Formula, Formula),
    Diamond(Action, Formula),
    Box(Action, Formula),
    Fix(Fixpoint, Formula),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula(Arc<Node>);

impl Formula {
    fn mk(node: Node) -> Formula {
        Formula(Arc::new(node))
    }

    pub fn prop(name: &str) -> Formula {
        Formula::mk(Node::Prop(Arc::from(name)))
    }

    pub fn neg_prop(name: &str) -> Formula {
        Formula::mk(Node::NegProp(Arc::from(name)))
    }

    pub fn var(index: u32) -> Formula {
        Formula::mk(Node::Var(index))
    }

    pub fn or(left: Formula, right: Formula) -> Formula {
        Formula::mk(Node::Or(left, right))
    }

    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::mk(Node::And(left, right))
    }

    pub fn diamond(action: Action, body: Formula) -> Formula {
        Formula::mk(Node::Diamond(action, body))
    }

    pub fn boxed(action: Action, body: Formula) -> Formula {
        Formula::mk(Node::Box(action, body))
    }

    /// Fixpoint over a body that already refers to the binder as `Var(0)`.
    pub fn fix(kind: Fixpoint, body: Formula) -> Formula {
        Formula::mk(Node::Fix(kind, body))
    }

    /// Binds every occurrence of the proposition `name` in `body`.
    pub fn bind(kind: Fixpoint, name: &str, body: &Formula) -> Result<Formula, SyntaxError> {
        Ok(Formula::fix(kind, body.abstract_prop(name, 0)?))
    }

    fn abstract_prop(&self, name: &str, depth: u32) -> Result<Formula, SyntaxError> {
        Ok(match self.node() {
            Node::Prop(p) if &**p == name => Formula::var(depth),
            Node::NegProp(p) if &**p == name => {
                return Err(SyntaxError::NegatedVariable {
                    name: name.to_string(),
                    pos: 0,
                })
            }
            Node::Prop(_) | Node::NegProp(_) | Node::Var(_) => self.clone(),
            Node::Or(l, r) => {
                Formula::or(l.abstract_prop(name, depth)?, r.abstract_prop(name, depth)?)
            }
            Node::And(l, r) => {
                Formula::and(l.abstract_prop(name, depth)?, r.abstract_prop(name, depth)?)
            }
            Node::Diamond(a, b) => Formula::diamond(a.clone(), b.abstract_prop(name, depth)?),
            Node::Box(a, b) => Formula::boxed(a.clone(), b.abstract_prop(name, depth)?),
            Node::Fix(k, b) => Formula::fix(*k, b.abstract_prop(name, depth + 1)?),
        })
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self.node(), Node::Fix(..))
    }

    pub fn fixpoint_kind(&self) -> Option<Fixpoint> {
        match self.node() {
            Node::Fix(k, _) => Some(*k),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self.node() {
            Node::Prop(_) | Node::NegProp(_) | Node::Var(_) => 1,
            Node::Or(l, r) | Node::And(l, r) => 1 + l.size() + r.size(),
            Node::Diamond(_, b) | Node::Box(_, b) | Node::Fix(_, b) => 1 + b.size(),
        }
    }

    /// True when no de Bruijn index escapes its binders.
    pub fn is_closed(&self) -> bool {
        self.escapes(0)
    }

    fn escapes(&self, depth: u32) -> bool {
        match self.node() {
            Node::Var(i) => *i < depth,
            Node::Prop(_) | Node::NegProp(_) => true,
            Node::Or(l, r) | Node::And(l, r) => l.escapes(depth) && r.escapes(depth),
            Node::Diamond(_, b) | Node::Box(_, b) => b.escapes(depth),
            Node::Fix(_, b) => b.escapes(depth + 1),
        }
    }

    /// Names of the free propositions, sorted.
    pub fn props(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<Arc<str>>) {
        match self.node() {
            Node::Prop(p) | Node::NegProp(p) => {
                out.insert(p.clone());
            }
            Node::Var(_) => {}
            Node::Or(l, r) | Node::And(l, r) => {
                l.collect_props(out);
                r.collect_props(out);
            }
            Node::Diamond(_, b) | Node::Box(_, b) | Node::Fix(_, b) => b.collect_props(out),
        }
    }

    /// Actions occurring in modalities, in both directions as written.
    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions(&self, out: &mut BTreeSet<Action>) {
        match self.node() {
            Node::Prop(_) | Node::NegProp(_) | Node::Var(_) => {}
            Node::Or(l, r) | Node::And(l, r) => {
                l.collect_actions(out);
                r.collect_actions(out);
            }
            Node::Diamond(a, b) | Node::Box(a, b) => {
                out.insert(a.clone());
                b.collect_actions(out);
            }
            Node::Fix(_, b) => b.collect_actions(out),
        }
    }

    /// De Morgan dual. Bound variables are left in place, which is the usual
    /// definable negation for formulas where no variable occurs negated.
    pub fn negate(&self) -> Formula {
        match self.node() {
            Node::Prop(p) => Formula::mk(Node::NegProp(p.clone())),
            Node::NegProp(p) => Formula::mk(Node::Prop(p.clone())),
            Node::Var(_) => self.clone(),
            Node::Or(l, r) => Formula::and(l.negate(), r.negate()),
            Node::And(l, r) => Formula::or(l.negate(), r.negate()),
            Node::Diamond(a, b) => Formula::boxed(a.clone(), b.negate()),
            Node::Box(a, b) => Formula::diamond(a.clone(), b.negate()),
            Node::Fix(k, b) => Formula::fix(k.dual(), b.negate()),
        }
    }

    /// `φ[ηxφ/x]` for `self = ηxφ`.
    pub fn unfold(&self) -> Result<Formula, SyntaxError> {
        match self.node() {
            Node::Fix(_, body) => Ok(body.substitute(0, self)),
            _ => Err(SyntaxError::NotFixpoint {
                formula: self.to_string(),
            }),
        }
    }

    fn substitute(&self, target: u32, replacement: &Formula) -> Formula {
        match self.node() {
            Node::Var(i) if *i == target => replacement.shift(target, 0),
            Node::Var(i) if *i > target => Formula::var(i - 1),
            Node::Var(_) | Node::Prop(_) | Node::NegProp(_) => self.clone(),
            Node::Or(l, r) => Formula::or(
                l.substitute(target, replacement),
                r.substitute(target, replacement),
            ),
            Node::And(l, r) => Formula::and(
                l.substitute(target, replacement),
                r.substitute(target, replacement),
            ),
            Node::Diamond(a, b) => Formula::diamond(a.clone(), b.substitute(target, replacement)),
            Node::Box(a, b) => Formula::boxed(a.clone(), b.substitute(target, replacement)),
            Node::Fix(k, b) => Formula::fix(*k, b.substitute(target + 1, replacement)),
        }
    }

    fn shift(&self, by: u32, cutoff: u32) -> Formula {
        if by == 0 {
            return self.clone();
        }
        match self.node() {
            Node::Var(i) if *i >= cutoff => Formula::var(i + by),
            Node::Var(_) | Node::Prop(_) | Node::NegProp(_) => self.clone(),
            Node::Or(l, r) => Formula::or(l.shift(by, cutoff), r.shift(by, cutoff)),
            Node::And(l, r) => Formula::and(l.shift(by, cutoff), r.shift(by, cutoff)),
            Node::Diamond(a, b) => Formula::diamond(a.clone(), b.shift(by, cutoff)),
            Node::Box(a, b) => Formula::boxed(a.clone(), b.shift(by, cutoff)),
            Node::Fix(k, b) => Formula::fix(*k, b.shift(by, cutoff + 1)),
        }
    }

    /// Immediate closure successors: subformulas for connectives and
    /// modalities, the unfolding for fixpoints.
    pub fn closure_successors(&self) -> Vec<Formula> {
        match self.node() {
            Node::Prop(_) | Node::NegProp(_) | Node::Var(_) => Vec::new(),
            Node::Or(l, r) | Node::And(l, r) => vec![l.clone(), r.clone()],
            Node::Diamond(_, b) | Node::Box(_, b) => vec![b.clone()],
            Node::Fix(..) => vec![self.unfold().expect("fixpoint")],
        }
    }

    /// The least set containing `self` that is closed under subformulas of
    /// connectives and modalities and under unfolding of fixpoints.
    pub fn closure(&self) -> BTreeSet<Formula> {
        let mut seen: HashSet<Formula> = HashSet::new();
        let mut queue = VecDeque::from([self.clone()]);
        while let Some(phi) = queue.pop_front() {
            if !seen.insert(phi.clone()) {
                continue;
            }
            queue.extend(phi.closure_successors());
        }
        seen.into_iter().collect()
    }

    /// For every subformula `ηxφ`, no free occurrence of `x` in `φ` lies in
    /// the scope of the opposite fixpoint operator.
    pub fn is_alternation_free(&self) -> bool {
        match self.node() {
            Node::Prop(_) | Node::NegProp(_) | Node::Var(_) => true,
            Node::Or(l, r) | Node::And(l, r) => l.is_alternation_free() && r.is_alternation_free(),
            Node::Diamond(_, b) | Node::Box(_, b) => b.is_alternation_free(),
            Node::Fix(k, b) => !b.var_under_dual(*k, 0, false) && b.is_alternation_free(),
        }
    }

    fn var_under_dual(&self, kind: Fixpoint, index: u32, under: bool) -> bool {
        match self.node() {
            Node::Var(i) => *i == index && under,
            Node::Prop(_) | Node::NegProp(_) => false,
            Node::Or(l, r) | Node::And(l, r) => {
                l.var_under_dual(kind, index, under) || r.var_under_dual(kind, index, under)
            }
            Node::Diamond(_, b) | Node::Box(_, b) => b.var_under_dual(kind, index, under),
            Node::Fix(k, b) => b.var_under_dual(kind, index + 1, under || *k != kind),
        }
    }

    /// Renders the formula into the concrete text grammar.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

const BINDER_NAMES: [&str; 6] = ["x", "y", "z", "w", "v", "u"];

fn binder_name(depth: usize, avoid: &BTreeSet<Arc<str>>, taken: &[String]) -> String {
    let mut k = depth;
    loop {
        let round = k / BINDER_NAMES.len();
        let base = BINDER_NAMES[k % BINDER_NAMES.len()];
        let candidate = if round == 0 {
            base.to_string()
        } else {
            format!("{base}{round}")
        };
        if !avoid.contains(candidate.as_str()) && !taken.contains(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

struct Printer {
    avoid: BTreeSet<Arc<str>>,
    names: Vec<String>,
}

// precedence: 0 top / binder body, 1 disjunct, 2 conjunct, 3 unary operand
impl Printer {
    fn write(&mut self, phi: &Formula, prec: u8, out: &mut String) {
        match phi.node() {
            Node::Prop(p) => out.push_str(p),
            Node::NegProp(p) => {
                out.push('~');
                out.push_str(p);
            }
            Node::Var(i) => {
                let idx = self.names.len().checked_sub(1 + *i as usize);
                match idx {
                    Some(idx) => out.push_str(&self.names[idx]),
                    None => out.push_str(&format!("#{i}")),
                }
            }
            Node::Or(l, r) => {
                let paren = prec > 1;
                if paren {
                    out.push('(');
                }
                self.write(l, 1, out);
                out.push_str(" | ");
                self.write(r, 2, out);
                if paren {
                    out.push(')');
                }
            }
            Node::And(l, r) => {
                let paren = prec > 2;
                if paren {
                    out.push('(');
                }
                self.write(l, 2, out);
                out.push_str(" & ");
                self.write(r, 3, out);
                if paren {
                    out.push(')');
                }
            }
            Node::Diamond(a, b) => {
                out.push_str(&format!("<{a}>"));
                self.write(b, 3, out);
            }
            Node::Box(a, b) => {
                out.push_str(&format!("[{a}]"));
                self.write(b, 3, out);
            }
            Node::Fix(k, b) => {
                let paren = prec > 0;
                if paren {
                    out.push('(');
                }
                let name = binder_name(self.names.len(), &self.avoid, &self.names);
                out.push_str(match k {
                    Fixpoint::Mu => "mu ",
                    Fixpoint::Nu => "nu ",
                });
                out.push_str(&name);
                out.push_str(". ");
                self.names.push(name);
                self.write(b, 0, out);
                self.names.pop();
                if paren {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut printer = Printer {
            avoid: self.props(),
            names: Vec::new(),
        };
        let mut out = String::new();
        printer.write(self, 0, &mut out);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn converse_is_an_involution() {
        let a = Action::new("a");
        assert_eq!(a.converse().converse(), a);
        assert_ne!(a.converse(), a);
    }

    #[test]
    fn negation_examples() {
        assert_eq!(f("nu x. <a><a'>x").negate(), f("mu x. [a][a']x"));
        assert_eq!(f("p | q").negate(), f("~p & ~q"));
        let phi = f("nu y. ([a]y & mu x. (<a'>x | p))");
        assert_eq!(phi.negate().negate(), phi);
    }

    #[test]
    fn unfold_examples() {
        let phi = f("mu x. (<a'>x | p)");
        let expected = Formula::or(
            Formula::diamond(Action::new("a").converse(), phi.clone()),
            Formula::prop("p"),
        );
        assert_eq!(phi.unfold().unwrap(), expected);
        let top = f("nu x. x");
        assert_eq!(top.unfold().unwrap(), top);
        let psi = f("nu y. ([a]y & mu x. (<a'>x | p))");
        let phi1 = f("mu x. (<a'>x | p)");
        assert_eq!(
            psi.unfold().unwrap(),
            Formula::and(Formula::boxed(Action::new("a"), psi.clone()), phi1)
        );
        assert!(matches!(
            f("p").unfold(),
            Err(SyntaxError::NotFixpoint { .. })
        ));
    }

    #[test]
    fn closure_examples() {
        let phi = f("nu x. <a><a'>x");
        let expected: BTreeSet<Formula> = [
            phi.clone(),
            f("<a><a'>nu x. <a><a'>x"),
            f("<a'>nu x. <a><a'>x"),
        ]
        .into_iter()
        .collect();
        assert_eq!(phi.closure(), expected);
        assert_eq!(f("p").closure(), [f("p")].into_iter().collect());
        let phi1 = f("mu x. (<a'>x | p)");
        let expected: BTreeSet<Formula> = [
            phi1.clone(),
            f("<a'>(mu x. <a'>x | p) | p"),
            f("<a'>mu x. <a'>x | p"),
            f("p"),
        ]
        .into_iter()
        .collect();
        assert_eq!(phi1.closure(), expected);
    }

    #[test]
    fn alternation_freeness() {
        assert!(f("nu x. <a><a'>x").is_alternation_free());
        assert!(f("nu y. ([a]y & mu x. (<a'>x | p))").is_alternation_free());
        let bad = Formula::fix(
            Fixpoint::Mu,
            Formula::fix(Fixpoint::Nu, Formula::and(Formula::var(1), Formula::var(0))),
        );
        assert!(!bad.is_alternation_free());
        // same-kind nesting is fine
        let good = Formula::fix(
            Fixpoint::Mu,
            Formula::fix(Fixpoint::Mu, Formula::or(Formula::var(1), Formula::var(0))),
        );
        assert!(good.is_alternation_free());
    }

    #[test]
    fn canonical_names_avoid_free_atoms() {
        let phi = Formula::bind(
            Fixpoint::Mu,
            "x",
            &Formula::or(Formula::prop("x"), Formula::prop("x2")),
        )
        .unwrap();
        assert_eq!(phi.to_string(), "mu x. x | x2");
        let clash = Formula::or(
            Formula::prop("x"),
            Formula::fix(Fixpoint::Nu, Formula::var(0)),
        );
        assert_eq!(clash.to_string(), "x | (nu y. y)");
        assert_eq!(f(&clash.to_string()), clash);
    }
}
