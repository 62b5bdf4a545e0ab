//! Sequents of annotated formulas and trace atoms over a fixed context, and
//! the rules that act on them.

use std::fmt;

use crate::syntax::parse::{Parser, Tok};
use crate::syntax::{Action, Context, Formula, FormulaId, Shape, SyntaxError};

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Annotation {
    /// Out of focus.
    U,
    /// In focus.
    F,
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Annotation::U => "u",
            Annotation::F => "f",
        })
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Member {
    Formula(FormulaId, Annotation),
    /// `φ ⇝ ψ`
    Trace(FormulaId, FormulaId),
    /// `φ ̸⇝ ψ`
    NegTrace(FormulaId, FormulaId),
}

impl Member {
    pub fn display(&self, ctx: &Context) -> String {
        match *self {
            Member::Formula(id, b) => format!("{} [{b}]", ctx.display(id)),
            Member::Trace(x, y) => format!("{} ~> {}", paren(ctx, x), paren(ctx, y)),
            Member::NegTrace(x, y) => format!("{} !~> {}", paren(ctx, x), paren(ctx, y)),
        }
    }
}

fn paren(ctx: &Context, id: FormulaId) -> String {
    format!("({})", ctx.display(id))
}

#[derive(Debug, thiserror::Error)]
pub enum CalculusError {
    #[error("formula {0} is not in the context")]
    NotInContext(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{0} is not a box formula")]
    NotABox(String),
}

/// A finite set of members over a context with `n` formulas, stored as a
/// bitset: annotated formulas first, then trace atoms, then negated trace
/// atoms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    n: u32,
    bits: Box<[u64]>,
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl Sequent {
    pub fn empty(ctx: &Context) -> Self {
        Sequent::with_size(ctx.len())
    }

    fn with_size(n: usize) -> Self {
        let total = 2 * n + 2 * n * n;
        Sequent {
            n: n as u32,
            bits: vec![0u64; total.div_ceil(64).max(1)].into_boxed_slice(),
        }
    }

    pub fn from_members(ctx: &Context, members: impl IntoIterator<Item = Member>) -> Self {
        let mut s = Sequent::empty(ctx);
        for m in members {
            s.insert(m);
        }
        s
    }

    pub fn context_size(&self) -> usize {
        self.n as usize
    }

    fn slot(&self, m: Member) -> usize {
        let n = self.n as usize;
        match m {
            Member::Formula(id, Annotation::U) => 2 * id.index(),
            Member::Formula(id, Annotation::F) => 2 * id.index() + 1,
            Member::Trace(x, y) => 2 * n + x.index() * n + y.index(),
            Member::NegTrace(x, y) => 2 * n + n * n + x.index() * n + y.index(),
        }
    }

    fn member_at(&self, slot: usize) -> Member {
        let n = self.n as usize;
        if slot < 2 * n {
            let ann = if slot.is_multiple_of(2) {
                Annotation::U
            } else {
                Annotation::F
            };
            Member::Formula(FormulaId((slot / 2) as u32), ann)
        } else if slot < 2 * n + n * n {
            let k = slot - 2 * n;
            Member::Trace(FormulaId((k / n) as u32), FormulaId((k % n) as u32))
        } else {
            let k = slot - 2 * n - n * n;
            Member::NegTrace(FormulaId((k / n) as u32), FormulaId((k % n) as u32))
        }
    }

    pub fn contains(&self, m: Member) -> bool {
        let i = self.slot(m);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Inserts a member; returns whether it was new.
    pub fn insert(&mut self, m: Member) -> bool {
        let i = self.slot(m);
        let fresh = !self.contains(m);
        self.bits[i / 64] |= 1 << (i % 64);
        fresh
    }

    pub fn remove(&mut self, m: Member) -> bool {
        let i = self.slot(m);
        let had = self.contains(m);
        self.bits[i / 64] &= !(1 << (i % 64));
        had
    }

    pub fn with(&self, extra: impl IntoIterator<Item = Member>) -> Self {
        let mut s = self.clone();
        for m in extra {
            s.insert(m);
        }
        s
    }

    pub fn without(&self, m: Member) -> Self {
        let mut s = self.clone();
        s.remove(m);
        s
    }

    /// Members in canonical order.
    pub fn members(&self) -> impl Iterator<Item = Member> + '_ {
        self.bits.iter().enumerate().flat_map(move |(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
            .map(move |slot| self.member_at(slot))
        })
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &Sequent) -> bool {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &Sequent) -> Sequent {
        Sequent {
            n: self.n,
            bits: self
                .bits
                .iter()
                .zip(other.bits.iter())
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn has_focus(&self) -> bool {
        self.members()
            .any(|m| matches!(m, Member::Formula(_, Annotation::F)))
    }

    pub fn has_formula(&self, id: FormulaId) -> bool {
        self.contains(Member::Formula(id, Annotation::U))
            || self.contains(Member::Formula(id, Annotation::F))
    }

    /// `Γ^-`: the formulas of the annotated members, in id order.
    pub fn formulas(&self) -> Vec<FormulaId> {
        let mut out: Vec<FormulaId> = self
            .members()
            .filter_map(|m| match m {
                Member::Formula(id, _) => Some(id),
                _ => None,
            })
            .collect();
        out.dedup();
        out
    }

    /// Re-annotates every formula with `ann`, keeping trace atoms.
    pub fn reannotate(&self, ann: Annotation) -> Sequent {
        let mut s = Sequent::with_size(self.n as usize);
        for m in self.members() {
            s.insert(match m {
                Member::Formula(id, _) => Member::Formula(id, ann),
                other => other,
            });
        }
        s
    }

    /// `Γ^u`
    pub fn unfocused(&self) -> Sequent {
        self.reannotate(Annotation::U)
    }

    /// `Γ^f`
    pub fn focused(&self) -> Sequent {
        self.reannotate(Annotation::F)
    }

    pub fn has_trace_atoms(&self) -> bool {
        self.members().any(|m| !matches!(m, Member::Formula(..)))
    }

    pub fn display(&self, ctx: &Context) -> String {
        self.members()
            .map(|m| m.display(ctx))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A member of a sequent written in text, before interning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawMember {
    Formula(Formula, Annotation),
    Trace(Formula, Formula),
    NegTrace(Formula, Formula),
}

impl RawMember {
    pub fn formulas(&self) -> Vec<Formula> {
        match self {
            RawMember::Formula(phi, _) => vec![phi.clone()],
            RawMember::Trace(a, b) | RawMember::NegTrace(a, b) => vec![a.clone(), b.clone()],
        }
    }
}

/// Parses `φ [f], ψ [u], φ ~> ψ, φ !~> ψ`. A formula without annotation is
/// in focus.
pub fn parse_sequent(text: &str) -> Result<Vec<RawMember>, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    if *p.peek() == Tok::Eof {
        return Ok(out);
    }
    loop {
        let phi = p.formula()?;
        let member = match p.peek().clone() {
            Tok::Trace | Tok::NegTrace => {
                let negated = p.bump() == Tok::NegTrace;
                let psi = p.formula()?;
                if negated {
                    RawMember::NegTrace(phi, psi)
                } else {
                    RawMember::Trace(phi, psi)
                }
            }
            Tok::LBracket => {
                p.bump();
                let ann = match p.bump() {
                    Tok::Ident(s) if s == "f" => Annotation::F,
                    Tok::Ident(s) if s == "u" => Annotation::U,
                    _ => return Err(p.error("expected annotation `f` or `u`")),
                };
                p.expect(Tok::RBracket)?;
                RawMember::Formula(phi, ann)
            }
            _ => RawMember::Formula(phi, Annotation::F),
        };
        out.push(member);
        match p.peek() {
            Tok::Comma => {
                p.bump();
            }
            _ => {
                p.expect_eof()?;
                return Ok(out);
            }
        }
    }
}

/// The negation-closed context generated by the formulas of `raw`.
pub fn context_for(raw: &[RawMember]) -> Result<Context, SyntaxError> {
    Context::new(raw.iter().flat_map(RawMember::formulas))
}

pub fn intern_sequent(ctx: &Context, raw: &[RawMember]) -> Result<Sequent, CalculusError> {
    let id = |phi: &Formula| {
        ctx.id_of(phi)
            .ok_or_else(|| CalculusError::NotInContext(phi.to_string()))
    };
    let mut s = Sequent::empty(ctx);
    for m in raw {
        s.insert(match m {
            RawMember::Formula(phi, b) => Member::Formula(id(phi)?, *b),
            RawMember::Trace(a, b) => Member::Trace(id(a)?, id(b)?),
            RawMember::NegTrace(a, b) => Member::NegTrace(id(a)?, id(b)?),
        });
    }
    Ok(s)
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Rule {
    Ax1,
    Ax2,
    Ax3,
    Or,
    And,
    Mu,
    Nu,
    Trans,
    Cut,
    Tc,
    Focus,
    Modal,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::Ax1,
        Rule::Ax2,
        Rule::Ax3,
        Rule::Or,
        Rule::And,
        Rule::Mu,
        Rule::Nu,
        Rule::Trans,
        Rule::Cut,
        Rule::Tc,
        Rule::Focus,
        Rule::Modal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax1 => "Ax1",
            Rule::Ax2 => "Ax2",
            Rule::Ax3 => "Ax3",
            Rule::Or => "R_or",
            Rule::And => "R_and",
            Rule::Mu => "R_mu",
            Rule::Nu => "R_nu",
            Rule::Trans => "trans",
            Rule::Cut => "cut",
            Rule::Tc => "tc",
            Rule::Focus => "F",
            Rule::Modal => "R_box",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }

    pub fn is_axiom(self) -> bool {
        matches!(self, Rule::Ax1 | Rule::Ax2 | Rule::Ax3)
    }

    /// Rules with a principal annotated formula whose side set may or may
    /// not retain it.
    pub fn has_principal_formula(self) -> bool {
        matches!(
            self,
            Rule::Or | Rule::And | Rule::Mu | Rule::Nu | Rule::Modal
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rule application. `principal` and `auxiliary` identify the instance:
///
/// * Ax1: `φ^b` and `φ̄^c`; Ax2: `φ ⇝ ψ` and `φ ̸⇝ ψ`; Ax3: `φ ⇝ φ`.
/// * R∨, R∧, Rμ, Rν, R[a]: the principal formula.
/// * trans: `φ ̸⇝ ψ` and `ψ ̸⇝ χ`.
/// * cut: `φ^u` for the cut formula `φ`; tc: `φ ⇝ ψ`.
///
/// `keeps_principal` selects the side set: the whole conclusion, or the
/// conclusion without the principal formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleInstance {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub principal: Option<Member>,
    pub auxiliary: Option<Member>,
    pub action: Option<Action>,
    pub keeps_principal: bool,
    pub premisses: Vec<Sequent>,
}

/// Which pairs of formulas the trace cut may introduce during search.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum TraceScope {
    /// Pairs `(β, χ)` and `(χ, β)` where `β` is a modal formula over `a`
    /// and `<a'>χ` is in the context. These are the pairs that the modal
    /// rule can transport.
    #[default]
    Relevant,
    /// Every pair of formulas in the context.
    All,
}

/// The rules of the calculus over a fixed context.
pub struct Calculus<'a> {
    ctx: &'a Context,
    tc_pairs: Vec<(FormulaId, FormulaId)>,
}

impl<'a> Calculus<'a> {
    pub fn new(ctx: &'a Context, scope: TraceScope) -> Self {
        let n = ctx.len() as u32;
        let mut tc_pairs = Vec::new();
        match scope {
            TraceScope::All => {
                for x in 0..n {
                    for y in 0..n {
                        tc_pairs.push((FormulaId(x), FormulaId(y)));
                    }
                }
            }
            TraceScope::Relevant => {
                let mut set = std::collections::BTreeSet::new();
                for beta in ctx.ids() {
                    let Some(a) = ctx.modality(beta) else {
                        continue;
                    };
                    for chi in ctx.ids() {
                        if ctx.diamond_of(&a.converse(), chi).is_some() {
                            set.insert((beta, chi));
                            set.insert((chi, beta));
                        }
                    }
                }
                tc_pairs = set.into_iter().collect();
            }
        }
        Calculus { ctx, tc_pairs }
    }

    pub fn context(&self) -> &'a Context {
        self.ctx
    }

    /// Pairs available to the trace cut during search, in canonical order.
    pub fn tc_pairs(&self) -> &[(FormulaId, FormulaId)] {
        &self.tc_pairs
    }

    /// `s(ξ, Γ)`
    pub fn s_value(&self, xi: FormulaId, gamma: &Sequent) -> Annotation {
        if gamma.contains(Member::Formula(xi, Annotation::F)) {
            return Annotation::F;
        }
        for m in gamma.members() {
            if let Member::Formula(theta, Annotation::F) = m {
                if gamma.contains(Member::NegTrace(theta, xi)) {
                    return Annotation::F;
                }
            }
        }
        Annotation::U
    }

    /// The jump of `side` with respect to the box `principal`, with `s`
    /// evaluated on `conclusion`.
    pub fn jump(
        &self,
        side: &Sequent,
        conclusion: &Sequent,
        principal: FormulaId,
    ) -> Result<Sequent, CalculusError> {
        let ctx = self.ctx;
        let Shape::Box(a, phi) = ctx.shape(principal) else {
            return Err(CalculusError::NotABox(ctx.display(principal)));
        };
        let (a, phi) = (a.clone(), *phi);
        let conv = a.converse();
        let mut out = Sequent::empty(ctx);
        out.insert(Member::Formula(phi, self.s_value(principal, conclusion)));
        for m in side.members() {
            match m {
                Member::Formula(id, _) => {
                    if let Shape::Diamond(b, psi) = ctx.shape(id) {
                        if *b == a {
                            out.insert(Member::Formula(*psi, self.s_value(id, conclusion)));
                        }
                    }
                    if let Some(bx) = ctx.box_of(&conv, id) {
                        out.insert(Member::Formula(bx, Annotation::U));
                    }
                }
                Member::Trace(x, chi) => {
                    let Some(back) = ctx.diamond_of(&conv, chi) else {
                        continue;
                    };
                    if x == principal {
                        out.insert(Member::Trace(phi, back));
                    } else if let Shape::Diamond(b, psi) = ctx.shape(x) {
                        if *b == a {
                            out.insert(Member::Trace(*psi, back));
                        }
                    }
                }
                Member::NegTrace(chi, y) => {
                    let Some(back) = ctx.diamond_of(&conv, chi) else {
                        continue;
                    };
                    if y == principal {
                        out.insert(Member::NegTrace(back, phi));
                    } else if let Shape::Diamond(b, psi) = ctx.shape(y) {
                        if *b == a {
                            out.insert(Member::NegTrace(back, *psi));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The first axiom instance with this conclusion, if any.
    pub fn axiom(&self, gamma: &Sequent) -> Option<RuleInstance> {
        let ctx = self.ctx;
        let mut ax2 = None;
        let mut ax3 = None;
        for m in gamma.members() {
            match m {
                Member::Formula(id, _) => {
                    let neg = ctx.negation(id);
                    for c in [Annotation::U, Annotation::F] {
                        if gamma.contains(Member::Formula(neg, c)) {
                            return Some(axiom_instance(
                                gamma,
                                Rule::Ax1,
                                m,
                                Some(Member::Formula(neg, c)),
                            ));
                        }
                    }
                }
                Member::Trace(x, y) => {
                    if ax2.is_none() && gamma.contains(Member::NegTrace(x, y)) {
                        ax2 = Some(axiom_instance(
                            gamma,
                            Rule::Ax2,
                            m,
                            Some(Member::NegTrace(x, y)),
                        ));
                    }
                    if ax3.is_none() && x == y {
                        ax3 = Some(axiom_instance(gamma, Rule::Ax3, m, None));
                    }
                }
                Member::NegTrace(..) => break,
            }
        }
        ax2.or(ax3)
    }

    pub fn is_axiom(&self, gamma: &Sequent) -> Option<Rule> {
        self.axiom(gamma).map(|i| i.rule)
    }

    fn side(conclusion: &Sequent, principal: Member, keep: bool) -> Sequent {
        if keep {
            conclusion.clone()
        } else {
            conclusion.without(principal)
        }
    }

    /// Premisses of a principal-formula rule, or `None` if the principal
    /// has the wrong shape.
    fn principal_premisses(
        &self,
        conclusion: &Sequent,
        rule: Rule,
        id: FormulaId,
        b: Annotation,
        keep: bool,
    ) -> Option<Vec<Sequent>> {
        let ctx = self.ctx;
        let principal = Member::Formula(id, b);
        let side = Self::side(conclusion, principal, keep);
        Some(match (rule, ctx.shape(id)) {
            (Rule::Or, Shape::Or(l, r)) => vec![side.with([
                Member::NegTrace(id, *l),
                Member::NegTrace(id, *r),
                Member::Formula(*l, b),
                Member::Formula(*r, b),
            ])],
            (Rule::And, Shape::And(l, r)) => vec![
                side.with([Member::NegTrace(id, *l), Member::Formula(*l, b)]),
                side.with([Member::NegTrace(id, *r), Member::Formula(*r, b)]),
            ],
            (Rule::Mu, Shape::Fix(crate::syntax::Fixpoint::Mu, u)) => {
                vec![side.with([Member::Formula(*u, Annotation::U)])]
            }
            (Rule::Nu, Shape::Fix(crate::syntax::Fixpoint::Nu, u)) => vec![side.with([
                Member::NegTrace(id, *u),
                Member::Trace(*u, id),
                Member::Formula(*u, b),
            ])],
            (Rule::Modal, Shape::Box(..)) => vec![self.jump(&side, conclusion, id).ok()?],
            _ => return None,
        })
    }

    fn principal_rule(&self, id: FormulaId) -> Rule {
        match self.ctx.shape(id) {
            Shape::Or(..) => Rule::Or,
            Shape::And(..) => Rule::And,
            Shape::Fix(crate::syntax::Fixpoint::Mu, _) => Rule::Mu,
            Shape::Fix(crate::syntax::Fixpoint::Nu, _) => Rule::Nu,
            Shape::Box(..) => Rule::Modal,
            Shape::Prop(_) | Shape::NegProp(_) | Shape::Diamond(..) => Rule::Ax1,
        }
    }

    pub fn principal_instance(
        &self,
        conclusion: &Sequent,
        id: FormulaId,
        b: Annotation,
        keep: bool,
    ) -> Option<RuleInstance> {
        let rule = self.principal_rule(id);
        if rule == Rule::Ax1 || !conclusion.contains(Member::Formula(id, b)) {
            return None;
        }
        let premisses = self.principal_premisses(conclusion, rule, id, b, keep)?;
        Some(RuleInstance {
            conclusion: conclusion.clone(),
            rule,
            principal: Some(Member::Formula(id, b)),
            auxiliary: None,
            action: self
                .ctx
                .modality(id)
                .cloned()
                .filter(|_| rule == Rule::Modal),
            keeps_principal: keep,
            premisses,
        })
    }

    pub fn cut_instance(&self, conclusion: &Sequent, phi: FormulaId) -> RuleInstance {
        let neg = self.ctx.negation(phi);
        RuleInstance {
            conclusion: conclusion.clone(),
            rule: Rule::Cut,
            principal: Some(Member::Formula(phi, Annotation::U)),
            auxiliary: None,
            action: None,
            keeps_principal: true,
            premisses: vec![
                conclusion.with([Member::Formula(phi, Annotation::U)]),
                conclusion.with([Member::Formula(neg, Annotation::U)]),
            ],
        }
    }

    pub fn tc_instance(&self, conclusion: &Sequent, x: FormulaId, y: FormulaId) -> RuleInstance {
        RuleInstance {
            conclusion: conclusion.clone(),
            rule: Rule::Tc,
            principal: Some(Member::Trace(x, y)),
            auxiliary: None,
            action: None,
            keeps_principal: true,
            premisses: vec![
                conclusion.with([Member::Trace(x, y)]),
                conclusion.with([Member::NegTrace(x, y)]),
            ],
        }
    }

    pub(crate) fn trans_instances(&self, conclusion: &Sequent) -> Vec<RuleInstance> {
        let neg: Vec<(FormulaId, FormulaId)> = conclusion
            .members()
            .filter_map(|m| match m {
                Member::NegTrace(x, y) => Some((x, y)),
                _ => None,
            })
            .collect();
        let mut out = Vec::new();
        for &(x, y) in &neg {
            for &(y2, z) in &neg {
                if y2 == y {
                    out.push(RuleInstance {
                        conclusion: conclusion.clone(),
                        rule: Rule::Trans,
                        principal: Some(Member::NegTrace(x, y)),
                        auxiliary: Some(Member::NegTrace(y, z)),
                        action: None,
                        keeps_principal: true,
                        premisses: vec![conclusion.with([Member::NegTrace(x, z)])],
                    });
                }
            }
        }
        out
    }

    pub fn focus_instance(&self, conclusion: &Sequent) -> Option<RuleInstance> {
        if conclusion.has_focus() {
            return None;
        }
        Some(RuleInstance {
            conclusion: conclusion.clone(),
            rule: Rule::Focus,
            principal: None,
            auxiliary: None,
            action: None,
            keeps_principal: true,
            premisses: vec![conclusion.focused()],
        })
    }

    fn annotated(conclusion: &Sequent) -> Vec<(FormulaId, Annotation)> {
        conclusion
            .members()
            .filter_map(|m| match m {
                Member::Formula(id, b) => Some((id, b)),
                _ => None,
            })
            .collect()
    }

    fn principal_instances(
        &self,
        conclusion: &Sequent,
        rule: Rule,
        keep_variants: &[bool],
    ) -> Vec<RuleInstance> {
        let mut out: Vec<RuleInstance> = Vec::new();
        for (id, b) in Self::annotated(conclusion) {
            if self.principal_rule(id) != rule {
                continue;
            }
            for &keep in keep_variants {
                if let Some(i) = self.principal_instance(conclusion, id, b, keep) {
                    if !out
                        .iter()
                        .any(|o| o.principal == i.principal && o.premisses == i.premisses)
                    {
                        out.push(i);
                    }
                }
            }
        }
        out
    }

    /// Every instance with conclusion `gamma`, in canonical order. Trace
    /// cuts range over [`Calculus::tc_pairs`].
    pub fn applicable_instances(&self, gamma: &Sequent) -> Vec<RuleInstance> {
        let mut out = Vec::new();
        out.extend(self.axiom_instances(gamma));
        for rule in [Rule::Or, Rule::And, Rule::Mu, Rule::Nu] {
            out.extend(self.principal_instances(gamma, rule, &[false, true]));
        }
        out.extend(self.trans_instances(gamma));
        for phi in self.ctx.ids() {
            out.push(self.cut_instance(gamma, phi));
        }
        for &(x, y) in &self.tc_pairs {
            out.push(self.tc_instance(gamma, x, y));
        }
        out.extend(self.focus_instance(gamma));
        out.extend(self.principal_instances(gamma, Rule::Modal, &[false, true]));
        out
    }

    /// All axiom instances with conclusion `gamma`.
    pub fn axiom_instances(&self, gamma: &Sequent) -> Vec<RuleInstance> {
        let ctx = self.ctx;
        let mut ax1 = Vec::new();
        let mut ax2 = Vec::new();
        let mut ax3 = Vec::new();
        for m in gamma.members() {
            match m {
                Member::Formula(id, _) => {
                    for c in [Annotation::U, Annotation::F] {
                        let other = Member::Formula(ctx.negation(id), c);
                        if gamma.contains(other) {
                            ax1.push(axiom_instance(gamma, Rule::Ax1, m, Some(other)));
                        }
                    }
                }
                Member::Trace(x, y) => {
                    if gamma.contains(Member::NegTrace(x, y)) {
                        ax2.push(axiom_instance(
                            gamma,
                            Rule::Ax2,
                            m,
                            Some(Member::NegTrace(x, y)),
                        ));
                    }
                    if x == y {
                        ax3.push(axiom_instance(gamma, Rule::Ax3, m, None));
                    }
                }
                Member::NegTrace(..) => {}
            }
        }
        ax1.into_iter().chain(ax2).chain(ax3).collect()
    }

    /// First productive cut or trace cut, cut formulas before trace pairs.
    pub fn productive_cut(&self, gamma: &Sequent) -> Option<RuleInstance> {
        for phi in self.ctx.ids() {
            let neg = self.ctx.negation(phi);
            if !gamma.contains(Member::Formula(phi, Annotation::U))
                && !gamma.contains(Member::Formula(neg, Annotation::U))
            {
                return Some(self.cut_instance(gamma, phi));
            }
        }
        for &(x, y) in &self.tc_pairs {
            if !gamma.contains(Member::Trace(x, y)) && !gamma.contains(Member::NegTrace(x, y)) {
                return Some(self.tc_instance(gamma, x, y));
            }
        }
        None
    }

    /// First instance of R∨, R∧, Rμ, Rν or trans that is cumulative and
    /// productive.
    pub fn productive_cumulative(&self, gamma: &Sequent) -> Option<RuleInstance> {
        let productive = |i: &RuleInstance| i.premisses.iter().all(|p| p != gamma);
        for rule in [Rule::Or, Rule::And, Rule::Mu, Rule::Nu] {
            for (id, b) in Self::annotated(gamma) {
                if self.principal_rule(id) != rule {
                    continue;
                }
                if let Some(i) = self.principal_instance(gamma, id, b, true) {
                    if productive(&i) {
                        return Some(i);
                    }
                }
            }
        }
        self.trans_instances(gamma)
            .into_iter()
            .find(|i| productive(i))
    }

    /// The modal instances used by the phased strategy: one per box member,
    /// with the principal kept in the side set.
    pub fn modal_instances(&self, gamma: &Sequent) -> Vec<RuleInstance> {
        self.principal_instances(gamma, Rule::Modal, &[true])
    }

    /// Whether `i` is a correct application of its rule: the premisses are
    /// recomputed from the conclusion and the identifying members, and all
    /// formulas must lie in the context. Trace cuts on any pair are valid.
    pub fn validate_instance(&self, i: &RuleInstance) -> bool {
        let n = self.ctx.len();
        if i.conclusion.context_size() != n || i.premisses.iter().any(|p| p.context_size() != n) {
            return false;
        }
        let in_range = |m: &Option<Member>| match m {
            None => true,
            Some(Member::Formula(x, _)) => x.index() < n,
            Some(Member::Trace(x, y)) | Some(Member::NegTrace(x, y)) => {
                x.index() < n && y.index() < n
            }
        };
        if !in_range(&i.principal) || !in_range(&i.auxiliary) {
            return false;
        }
        let c = &i.conclusion;
        let expected: Option<Vec<Sequent>> = match (i.rule, i.principal, i.auxiliary) {
            (Rule::Ax1, Some(Member::Formula(x, _)), Some(Member::Formula(y, _))) => {
                (self.ctx.negation(x) == y
                    && c.contains(i.principal.unwrap())
                    && c.contains(i.auxiliary.unwrap()))
                .then(Vec::new)
            }
            (Rule::Ax2, Some(Member::Trace(x, y)), Some(Member::NegTrace(x2, y2))) => (x == x2
                && y == y2
                && c.contains(Member::Trace(x, y))
                && c.contains(Member::NegTrace(x, y)))
            .then(Vec::new),
            (Rule::Ax3, Some(Member::Trace(x, y)), None) => {
                (x == y && c.contains(Member::Trace(x, x))).then(Vec::new)
            }
            (
                Rule::Or | Rule::And | Rule::Mu | Rule::Nu | Rule::Modal,
                Some(Member::Formula(id, b)),
                None,
            ) => {
                if self.principal_rule(id) != i.rule || !c.contains(Member::Formula(id, b)) {
                    None
                } else {
                    let action_ok = match i.rule {
                        Rule::Modal => i.action.as_ref() == self.ctx.modality(id),
                        _ => i.action.is_none(),
                    };
                    if action_ok {
                        self.principal_premisses(c, i.rule, id, b, i.keeps_principal)
                    } else {
                        None
                    }
                }
            }
            (Rule::Trans, Some(Member::NegTrace(x, y)), Some(Member::NegTrace(y2, z))) => (y == y2
                && c.contains(Member::NegTrace(x, y))
                && c.contains(Member::NegTrace(y, z)))
            .then(|| vec![c.with([Member::NegTrace(x, z)])]),
            (Rule::Cut, Some(Member::Formula(phi, Annotation::U)), None) => {
                Some(self.cut_instance(c, phi).premisses)
            }
            (Rule::Tc, Some(Member::Trace(x, y)), None) => {
                Some(self.tc_instance(c, x, y).premisses)
            }
            (Rule::Focus, None, None) => (!c.has_focus()).then(|| vec![c.focused()]),
            _ => None,
        };
        let flags_ok = i.rule.has_principal_formula() || i.keeps_principal;
        let action_ok = i.rule == Rule::Modal || i.action.is_none();
        flags_ok && action_ok && expected.as_ref() == Some(&i.premisses)
    }
}

fn axiom_instance(
    gamma: &Sequent,
    rule: Rule,
    principal: Member,
    auxiliary: Option<Member>,
) -> RuleInstance {
    RuleInstance {
        conclusion: gamma.clone(),
        rule,
        principal: Some(principal),
        auxiliary,
        action: None,
        keeps_principal: true,
        premisses: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    struct Fixture {
        ctx: Context,
    }

    impl Fixture {
        fn new(seeds: &[&str]) -> Self {
            Fixture {
                ctx: Context::new(seeds.iter().map(|s| parse_formula(s).unwrap())).unwrap(),
            }
        }

        fn id(&self, text: &str) -> FormulaId {
            self.ctx.id_of(&parse_formula(text).unwrap()).unwrap()
        }

        fn seq(&self, text: &str) -> Sequent {
            intern_sequent(&self.ctx, &parse_sequent(text).unwrap()).unwrap()
        }
    }

    #[test]
    fn projections() {
        let fx = Fixture::new(&["p", "q"]);
        let g = fx.seq("p [f], q [u], p ~> q");
        assert_eq!(g.formulas(), {
            let mut v = vec![fx.id("p"), fx.id("q")];
            v.sort();
            v
        });
        assert_eq!(fx.seq("p [f], p ~> q").unfocused(), fx.seq("p [u], p ~> q"));
        assert_eq!(g.unfocused().focused(), g.focused());
    }

    #[test]
    fn s_value_cases() {
        let fx = Fixture::new(&["p", "q"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::All);
        let xi = fx.id("q");
        assert_eq!(calc.s_value(xi, &fx.seq("q [f]")), Annotation::F);
        assert_eq!(calc.s_value(xi, &fx.seq("p [f], p !~> q")), Annotation::F);
        assert_eq!(
            calc.s_value(xi, &fx.seq("q [u], p [u], p !~> q")),
            Annotation::U
        );
    }

    #[test]
    fn jump_single_box() {
        let fx = Fixture::new(&["[a]p"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::All);
        let concl = fx.seq("[a]p [u]");
        let side = Sequent::empty(&fx.ctx);
        assert_eq!(
            calc.jump(&side, &concl, fx.id("[a]p")).unwrap(),
            fx.seq("p [u]")
        );
    }

    #[test]
    fn axioms() {
        let fx = Fixture::new(&["p", "q"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::All);
        assert_eq!(calc.is_axiom(&fx.seq("p [u], ~p [f]")), Some(Rule::Ax1));
        assert_eq!(calc.is_axiom(&fx.seq("p ~> p")), Some(Rule::Ax3));
        assert_eq!(calc.is_axiom(&fx.seq("p ~> q, p !~> q")), Some(Rule::Ax2));
        assert_eq!(calc.is_axiom(&fx.seq("p [u], q [f]")), None);
        assert_eq!(calc.is_axiom(&fx.seq("p !~> p")), None);
    }

    #[test]
    fn disjunction_and_focus_instances() {
        let fx = Fixture::new(&["p | q"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::All);
        let all = calc.applicable_instances(&fx.seq("p | q [f]"));
        let expected = fx.seq("(p | q) !~> p, (p | q) !~> q, p [f], q [f]");
        assert!(all
            .iter()
            .any(|i| i.rule == Rule::Or && i.premisses == vec![expected.clone()]));
        let all = calc.applicable_instances(&fx.seq("p [u]"));
        assert!(all
            .iter()
            .any(|i| i.rule == Rule::Focus && i.premisses == vec![fx.seq("p [f]")]));
        for i in &all {
            assert!(calc.validate_instance(i), "{:?}", i.rule);
        }
    }

    #[test]
    fn nu_top_is_cumulative_and_productive() {
        let fx = Fixture::new(&["nu x. x"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::All);
        let g = fx.seq("nu x. x [f]");
        let i = calc.productive_cumulative(&g).unwrap();
        assert_eq!(i.rule, Rule::Nu);
        assert_eq!(
            i.premisses,
            vec![fx.seq("nu x. x [f], (nu x. x) !~> (nu x. x), (nu x. x) ~> (nu x. x)")]
        );
    }

    #[test]
    fn validation_rejects_tampering() {
        let fx = Fixture::new(&["~p | nu y.([a]y & mu x.(<a'>x | p))"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::Relevant);
        let concl =
            fx.seq("~p [f], [a]nu y.([a]y & mu x.(<a'>x | p)) [f], ~(mu x.(<a'>x | p)) [u]");
        let modal = calc
            .applicable_instances(&concl)
            .into_iter()
            .find(|i| i.rule == Rule::Modal && !i.keeps_principal)
            .unwrap();
        assert!(calc.validate_instance(&modal));
        let mut bad = modal.clone();
        let boxed = fx.id("[a']~(mu x.(<a'>x | p))");
        bad.premisses[0].remove(Member::Formula(boxed, Annotation::U));
        assert!(!calc.validate_instance(&bad));
    }

    #[test]
    fn cut_outside_context_rejected() {
        let fx = Fixture::new(&["p"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::All);
        let concl = fx.seq("p [f]");
        let mut cut = calc.cut_instance(&concl, fx.id("p"));
        assert!(calc.validate_instance(&cut));
        cut.principal = Some(Member::Formula(FormulaId(7), Annotation::U));
        assert!(!calc.validate_instance(&cut));
    }

    #[test]
    fn sequent_text_round_trip() {
        let fx = Fixture::new(&["<a>p", "nu x. <a><a'>x"]);
        let g = fx.seq(
            "[a]~p [f], <a><a'>nu x. <a><a'>x [u], (nu x. <a><a'>x) !~> <a><a'>nu x. <a><a'>x",
        );
        let text = g.display(&fx.ctx);
        assert_eq!(fx.seq(&text), g);
        assert_eq!(fx.seq("p"), fx.seq("p [f]"));
        assert!(parse_sequent("p [g]").is_err());
        assert!(parse_sequent("").unwrap().is_empty());
    }

    #[test]
    fn premisses_keep_side_members() {
        let fx = Fixture::new(&["p & q", "nu x. <a>x", "mu y. [a]y | ~q"]);
        let calc = Calculus::new(&fx.ctx, TraceScope::All);
        let g = fx.seq("p & q [f], nu x. <a>x [u], mu y. [a]y | ~q [f], p !~> q, q !~> (p & q)");
        let all = calc.applicable_instances(&g);
        assert!(all.len() > 10);
        for i in &all {
            assert!(calc.validate_instance(i));
            if matches!(i.rule, Rule::Modal | Rule::Focus) {
                continue;
            }
            let side = match (i.keeps_principal, i.principal) {
                (false, Some(m)) => g.without(m),
                _ => g.clone(),
            };
            for p in &i.premisses {
                assert!(side.is_subset(p), "{}", i.rule);
            }
        }
    }
}
