//! Semantic values: weak-head normal forms with closures and neutral spines.

use std::rc::Rc;

use crate::level::LevelNF;
use crate::syntax::{GlobalId, Icit, Lvl, MetaId, Name, Tm};

pub type Val = Rc<Value>;
pub type Env = Vec<Val>;
pub type LevelVal = LevelNF<Val>;

#[derive(Clone, Debug, PartialEq)]
pub struct Closure {
    pub env: Env,
    pub body: Tm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    Var(Lvl),
    Meta(MetaId),
    /// A postulate, a definition that is still being checked, or a clausal
    /// definition whose matching is blocked.
    Global(GlobalId),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Elim {
    App(Val, Icit),
    Fst,
    Snd,
    /// Motive and refl case; the neutral is the equation.
    J(Val, Val),
    /// Motive type; the neutral is the proof of Empty.
    Absurd(Val),
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Neutral(Head, Vec<Elim>),
    Lam(Name, Icit, Closure),
    Pi(Name, Icit, Val, Option<Val>, Closure, Option<Closure>),
    Sigma(Name, Val, Option<Val>, Closure, Option<Closure>),
    Pair(Val, Val),
    Unit,
    Tt,
    Empty,
    Nat,
    Zero,
    Suc(Val),
    List(Val),
    Nil,
    Cons(Val, Val),
    Id(Val, Val, Val),
    Refl,
    Lift(Val, Val),
    LiftIntro(Val),
    Sort(LevelVal),
    /// The limit sort inhabited by signatures whose level depends on their arguments.
    SortOmega,
    Level,
    Lvl(LevelVal),
}

impl Value {
    pub fn var(l: Lvl) -> Val {
        Rc::new(Value::Neutral(Head::Var(l), Vec::new()))
    }

    pub fn meta(m: MetaId) -> Val {
        Rc::new(Value::Neutral(Head::Meta(m), Vec::new()))
    }

    pub fn level(nf: LevelVal) -> Val {
        Rc::new(Value::Lvl(nf))
    }

    pub fn sort(nf: LevelVal) -> Val {
        Rc::new(Value::Sort(nf))
    }

    pub fn numeral(n: u64) -> Val {
        (0..n).fold(Rc::new(Value::Zero), |acc, _| Rc::new(Value::Suc(acc)))
    }

    /// The closed natural number this value denotes, if it is a numeral.
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            Value::Zero => Some(0),
            Value::Suc(v) => v.as_numeral().map(|n| n + 1),
            _ => None,
        }
    }

    pub fn flex_meta(&self) -> Option<MetaId> {
        match self {
            Value::Neutral(Head::Meta(m), _) => Some(*m),
            _ => None,
        }
    }
}

/// The identity environment of a context with `depth` variables.
pub fn identity_env(depth: usize) -> Env {
    (0..depth).map(|l| Value::var(Lvl(l))).collect()
}
