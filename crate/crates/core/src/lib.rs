//! Decision procedures and proof tools for Goedel modal logics.

mod lexer;

pub mod atomic;
pub mod corpus;
pub mod formula;
pub mod hypersequent;
pub mod prover;
pub mod rational;
pub mod relations;
pub mod semantics;

pub use atomic::{ChainCertificate, ChainCondition, ConstantTable};
pub use formula::{parse_formula, Formula, Logic, ParseError};
pub use hypersequent::{check_derivation, eliminate_cuts, interp_hyper, parse_hypersequent, HDerivation, HRule, HSequent, Hypersequent};
pub use prover::{check_trace, decide, decide_formula, Outcome, ProofTrace, Prover, ProverConfig, ProverError, Verdict};
pub use rational::Rational;
pub use relations::{parse_sequent, RelKind, Relation, SequentOfRelations};
pub use semantics::{
    countermodel_search, eval_formula, prop_grid_oracle, Countermodel, FrameKind, KripkeModel, SearchConfig, SearchMode, SemanticsError,
};
