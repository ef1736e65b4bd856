//! The metavariable store and the constraint queue.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::eval::{Ev, Globals};
use crate::syntax::{well_scoped, MetaId, Name, Span, Term, Tm};
use crate::value::{Val, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetaReason {
    Implicit,
    Underscore,
    /// The type of an underscore or of an unannotated binder.
    Type,
    /// The level of a type that had to be invented.
    Level,
    Eta,
    Inversion,
}

impl fmt::Display for MetaReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetaReason::Implicit => "implicit",
            MetaReason::Underscore => "underscore",
            MetaReason::Type => "type",
            MetaReason::Level => "level",
            MetaReason::Eta => "eta",
            MetaReason::Inversion => "inversion",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MetaEntry {
    pub id: MetaId,
    /// Names of the bound variables the meta abstracts over.
    pub tele: Vec<Name>,
    /// Closed type: a Pi over the telescope.
    pub ty: Tm,
    pub ty_val: Val,
    /// Closed solution: a lambda over the telescope.
    pub solution: Option<Tm>,
    pub solution_val: Option<Val>,
    pub span: Span,
    pub reason: MetaReason,
    pub decl: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Active,
    Postponed(BTreeSet<MetaId>),
    Solved,
    /// Decomposed; solved once every listed child is.
    Delegated(Vec<usize>),
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct ConstraintEntry {
    pub id: usize,
    /// Names of the context the two sides live in.
    pub names: Vec<Name>,
    pub lhs: Val,
    pub rhs: Val,
    pub status: Status,
    pub span: Span,
    pub decl: usize,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("{0} is already solved")]
    AlreadySolved(MetaId),
    #[error("occurs check: {0} appears in its own solution")]
    Occurs(MetaId),
    #[error("scope error: the solution of {0} mentions variables outside its context")]
    Scope(MetaId),
}

#[derive(Clone, Debug, Default)]
pub struct MetaCtx {
    pub metas: Vec<MetaEntry>,
    pub constraints: Vec<ConstraintEntry>,
    queue: VecDeque<usize>,
}

impl MetaCtx {
    pub fn get(&self, m: MetaId) -> &MetaEntry {
        &self.metas[m.0 as usize]
    }

    pub fn solution_val(&self, m: MetaId) -> Option<&Val> {
        self.metas.get(m.0 as usize).and_then(|e| e.solution_val.as_ref())
    }

    pub fn is_solved(&self, m: MetaId) -> bool {
        self.solution_val(m).is_some()
    }

    pub fn next_id(&self) -> MetaId {
        MetaId(self.metas.len() as u32)
    }

    pub fn push_meta(&mut self, entry: MetaEntry) -> MetaId {
        let id = entry.id;
        debug_assert_eq!(id, self.next_id());
        self.metas.push(entry);
        id
    }

    pub fn push_constraint(&mut self, names: Vec<Name>, lhs: Val, rhs: Val, span: Span, decl: usize) -> usize {
        let id = self.constraints.len();
        self.constraints.push(ConstraintEntry { id, names, lhs, rhs, status: Status::Active, span, decl });
        id
    }

    pub fn pop_queue(&mut self) -> Option<usize> {
        self.queue.pop_front()
    }

    pub fn enqueue(&mut self, c: usize) {
        self.queue.push_back(c);
    }

    pub fn queue_is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Stores a validated solution and wakes the constraints blocked on it.
    fn assign(&mut self, m: MetaId, sol: Tm, val: Val) {
        let entry = &mut self.metas[m.0 as usize];
        entry.solution = Some(sol);
        entry.solution_val = Some(val);
        for c in &mut self.constraints {
            if matches!(&c.status, Status::Postponed(bs) if bs.contains(&m)) {
                c.status = Status::Active;
                self.queue.push_back(c.id);
            }
        }
    }

    /// Marks delegated constraints solved once all their children are.
    pub fn settle_delegated(&mut self) {
        loop {
            let mut changed = false;
            for i in 0..self.constraints.len() {
                if let Status::Delegated(children) = &self.constraints[i].status {
                    if children.iter().all(|c| self.constraints[*c].status == Status::Solved) {
                        self.constraints[i].status = Status::Solved;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub fn unsolved_metas(&self, decl: usize) -> impl Iterator<Item = &MetaEntry> {
        self.metas.iter().filter(move |m| m.decl == decl && m.solution.is_none())
    }

    /// Constraints of `decl` that are still waiting, children rather than parents.
    pub fn unsolved_constraints(&self, decl: usize) -> impl Iterator<Item = &ConstraintEntry> {
        self.constraints
            .iter()
            .filter(move |c| c.decl == decl && matches!(c.status, Status::Postponed(_) | Status::Active))
    }
}

/// Validates and stores `?m := sol` for a closed solution.
pub fn solve_meta(metas: &mut MetaCtx, globals: &Globals, m: MetaId, sol: Tm) -> Result<(), SolveError> {
    if metas.is_solved(m) {
        return Err(SolveError::AlreadySolved(m));
    }
    let ev = Ev::new(globals, metas);
    let zonked = ev.zonk(0, &sol);
    if zonked.mentions_meta(m) {
        return Err(SolveError::Occurs(m));
    }
    let known_meta = |x: MetaId| (x.0 as usize) < metas.metas.len();
    let known_global = |g: crate::syntax::GlobalId| (g.0 as usize) < globals.len();
    if !well_scoped(&zonked, 0, &known_global, &known_meta) {
        return Err(SolveError::Scope(m));
    }
    let val = ev.eval(&Vec::new(), &zonked);
    metas.assign(m, zonked, val);
    Ok(())
}

/// Registers a meta with a closed type and returns its id.
pub fn new_meta(
    metas: &mut MetaCtx,
    globals: &Globals,
    tele: Vec<Name>,
    ty: Tm,
    span: Span,
    reason: MetaReason,
    decl: usize,
) -> MetaId {
    let ty_val = Ev::new(globals, metas).eval(&Vec::new(), &ty);
    let id = metas.next_id();
    metas.push_meta(MetaEntry {
        id,
        tele,
        ty,
        ty_val,
        solution: None,
        solution_val: None,
        span,
        reason,
        decl,
    })
}

/// Unsolved metas occurring in the forced read-back of `v`.
pub fn blockers(ev: &Ev<'_>, depth: usize, v: &Val) -> BTreeSet<MetaId> {
    let mut out = BTreeSet::new();
    if matches!(&**v, Value::SortOmega) {
        return out;
    }
    ev.quote(depth, v).metas(&mut out);
    out
}

/// True if the closed term mentions an unsolved meta.
pub fn has_unsolved(metas: &MetaCtx, t: &Term) -> bool {
    let mut ms = BTreeSet::new();
    t.metas(&mut ms);
    ms.iter().any(|m| !metas.is_solved(*m))
}
