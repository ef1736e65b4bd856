//! A small dependently typed checker: normalisation by evaluation, universe
//! levels, metavariables with pattern unification and clause inversion, and
//! a surface language for writing arity-generic programs.

pub mod conv;
pub mod driver;
pub mod elab;
pub mod eval;
pub mod level;
pub mod meta;
pub mod parse;
pub mod pretty;
pub mod surface;
pub mod syntax;
pub mod tc;
pub mod typecheck;
pub mod unify;
pub mod value;

pub use driver::{Flags, Outcome, Session, PRELUDE};
pub use tc::Options;
