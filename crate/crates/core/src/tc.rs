//! The mutable state of one checking session.

use crate::eval::{Ev, Globals};
use crate::meta::MetaCtx;
use crate::syntax::{GlobalId, Span};

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Record one line per unifier rule application.
    pub trace: bool,
    /// Force inversion event `.0` (counted per session) to pick clause `.1`.
    pub inversion_override: Option<(usize, usize)>,
}

/// One firing of the clause inversion rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InversionEvent {
    pub decl: usize,
    pub global: GlobalId,
    pub chosen: usize,
    pub clauses: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Tc {
    pub globals: Globals,
    pub metas: MetaCtx,
    pub options: Options,
    pub trace: Vec<String>,
    pub inversions: Vec<InversionEvent>,
    /// Index of the declaration being checked.
    pub decl: usize,
    /// Origin of the constraint being worked on.
    pub(crate) span: Span,
    pub(crate) children: Vec<usize>,
    pub(crate) draining: bool,
}

impl Tc {
    pub fn new(options: Options) -> Self {
        Tc { options, ..Tc::default() }
    }

    pub fn ev(&self) -> Ev<'_> {
        Ev::new(&self.globals, &self.metas)
    }
}
