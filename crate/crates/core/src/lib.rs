//! Proof search and countermodel extraction for the two-way
//! alternation-free modal mu-calculus.
//!
//! Formulas live in [`syntax`], models and the evaluation game in
//! [`semantics`], annotated sequents and rule instances in [`calculus`].
//! [`search::prove`] decides a sequent; a Refuter win goes to
//! [`countermodel::verified_refute`].

pub mod calculus;
pub mod corpus;
pub mod countermodel;
pub mod paritygames;
pub mod search;
pub mod semantics;
pub mod syntax;

pub use calculus::{Annotation, Calculus, Member, Rule, RuleInstance, Sequent, TraceScope};
pub use countermodel::{verified_refute, CountermodelCertificate, CountermodelError};
pub use paritygames::{brute_force_winner, solve, ParityGame, Player, Solution};
pub use search::{
    prove, prove_formula, verify_proof, Mode, Outcome, Proof, RefuterWitness, SearchConfig,
    SearchError,
};
pub use semantics::{fixpoint_oracle, model_check, KripkeModel, OpsStrategy};
pub use syntax::{
    negation_closed_context, parse_formula, Action, Context, Fixpoint, Formula, FormulaId,
};
