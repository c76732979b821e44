//! simplylog: a self-contained logic-programming engine and reasoning
//! toolkit. Clausal logic and resolution, SLD resolution under several
//! search strategies, heuristic graph search, definite clause grammars
//! with a small question-answering agent, reasoning with incomplete
//! information, and inductive generalization.

pub mod clausal;
pub mod fol;
pub mod induce;
pub mod lang;
pub mod reader;
pub mod reason;
pub mod search;
pub mod sld;
pub mod term;

pub use clausal::{GeneralClause, Program};
pub use term::{Subst, Term, VarSupply};
