//! Checking whole files: declaration grouping, reports, expectations and
//! the post-run validation pass.

use std::fmt::Write as _;
use std::rc::Rc;

use crate::conv::conv;
use crate::elab::{Ctx, ElabError};
use crate::eval::{GlobalDef, GlobalEntry};
use crate::meta::Status;
use crate::parse::{parse_file, ParseError};
use crate::pretty::{show_term, show_val};
use crate::surface::{Decl, Expect, Expr, SPattern};
use crate::syntax::{check_clauses, Clause, ClauseDef, GlobalId, Icit, Name, Span};
use crate::tc::{Options, Tc};
use crate::typecheck::{self, CoreCtx, Strict};
use crate::unify::head_kind;
use crate::value::identity_env;

pub const PRELUDE: &str = include_str!("../prelude/prelude.nry");

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Unsolved { metas: usize, constraints: usize },
    TypeError(String),
}

impl Outcome {
    pub fn tag(&self) -> Expect {
        match self {
            Outcome::Ok => Expect::Ok,
            Outcome::Unsolved { .. } => Expect::Unsolved,
            Outcome::TypeError(_) => Expect::TypeError,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeclReport {
    pub name: Name,
    /// Session-wide index of the declaration.
    pub index: usize,
    pub span: Span,
    pub outcome: Outcome,
    pub expect: Expect,
    /// Unsolved metas and constraints, one line each.
    pub details: Vec<String>,
    pub trace: Vec<String>,
    /// Every meta of the declaration with its solution.
    pub metas: Vec<String>,
}

impl DeclReport {
    pub fn matches(&self) -> bool {
        self.outcome.tag() == self.expect
    }

    pub fn headline(&self) -> String {
        match &self.outcome {
            Outcome::Ok => format!("OK {}", self.name),
            Outcome::Unsolved { metas, constraints } => {
                format!("UNSOLVED {}: {metas} metas, {constraints} constraints", self.name)
            }
            Outcome::TypeError(msg) => format!("TYPEERROR {}: {msg}", self.name),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Flags {
    pub trace_unify: bool,
    pub print_metas: bool,
}

#[derive(Clone, Debug, Default)]
pub struct FileReport {
    pub decls: Vec<DeclReport>,
}

impl FileReport {
    pub fn all_expected(&self) -> bool {
        self.decls.iter().all(DeclReport::matches)
    }

    pub fn get(&self, name: &str) -> Option<&DeclReport> {
        self.decls.iter().find(|d| &*d.name == name)
    }

    pub fn render(&self, flags: Flags) -> String {
        let mut out = String::new();
        for d in &self.decls {
            if flags.trace_unify {
                for t in &d.trace {
                    let _ = writeln!(out, "{t}");
                }
            }
            let _ = writeln!(out, "{}", d.headline());
            for l in &d.details {
                let _ = writeln!(out, "  {l}");
            }
            if flags.print_metas {
                for l in &d.metas {
                    let _ = writeln!(out, "  {l}");
                }
            }
        }
        for d in self.decls.iter().filter(|d| !d.matches()) {
            let _ = writeln!(out, "MISMATCH {}: expected {}, got {}", d.name, d.expect, d.outcome.tag());
        }
        out
    }
}

/// Result of re-verifying solved constraints and metas without the unifier.
#[derive(Clone, Debug, Default)]
pub struct Validation {
    pub constraints: usize,
    pub metas: usize,
    pub failures: Vec<String>,
}

type SClause<'a> = (&'a [(SPattern, Icit)], &'a Expr, Span);

/// One declaration as it arrives from a file.
enum Unit<'a> {
    Def { name: &'a Name, ty: &'a Expr, span: Span, clauses: Vec<SClause<'a>> },
    Postulate { name: &'a Name, ty: &'a Expr, span: Span },
    Stray { name: &'a Name, span: Span },
}

fn group(decls: &[Decl]) -> Vec<(Unit<'_>, Expect)> {
    let mut out = Vec::new();
    let mut expect = None;
    let mut i = 0;
    while i < decls.len() {
        let unit = match &decls[i] {
            Decl::Expect { tag, .. } => {
                expect = Some(*tag);
                i += 1;
                continue;
            }
            Decl::Sig { name, ty, span } => {
                let mut clauses = Vec::new();
                while let Some(Decl::Clause { name: n, pats, rhs, span }) = decls.get(i + 1) {
                    if n != name {
                        break;
                    }
                    clauses.push((pats.as_slice(), rhs, *span));
                    i += 1;
                }
                Unit::Def { name, ty, span: *span, clauses }
            }
            Decl::Postulate { name, ty, span } => Unit::Postulate { name, ty, span: *span },
            Decl::Clause { name, span, .. } => Unit::Stray { name, span: *span },
        };
        out.push((unit, expect.take().unwrap_or(Expect::Ok)));
        i += 1;
    }
    out
}

/// A checking session: globals, metas and constraints shared by the files
/// checked in it.
#[derive(Clone, Debug)]
pub struct Session {
    pub tc: Tc,
    next_decl: usize,
    current_global: Option<(usize, GlobalId)>,
}

impl Session {
    pub fn new(options: Options) -> Self {
        Session { tc: Tc::new(options), next_decl: 0, current_global: None }
    }

    /// A session with the prelude checked; fails if any prelude declaration
    /// does not check cleanly.
    pub fn with_prelude(options: Options) -> Result<Self, String> {
        let mut s = Session::new(options);
        let report = s.check_source(PRELUDE).map_err(|e| format!("prelude: {e}"))?;
        let bad: Vec<String> = report.decls.iter().filter(|d| d.outcome != Outcome::Ok).map(|d| d.headline()).collect();
        if bad.is_empty() {
            Ok(s)
        } else {
            Err(format!("prelude does not check:\n{}", bad.join("\n")))
        }
    }

    pub fn check_source(&mut self, src: &str) -> Result<FileReport, ParseError> {
        Ok(self.check_decls(&parse_file(src)?))
    }

    pub fn check_decls(&mut self, decls: &[Decl]) -> FileReport {
        let mut report = FileReport::default();
        for (unit, expect) in group(decls) {
            let index = self.next_decl;
            self.next_decl += 1;
            self.tc.decl = index;
            let (name, span) = match &unit {
                Unit::Def { name, span, .. } | Unit::Postulate { name, span, .. } | Unit::Stray { name, span } => {
                    ((*name).clone(), *span)
                }
            };
            let res = self.process(&unit);
            let outcome = match res {
                Ok(()) => {
                    let metas = self.tc.metas.unsolved_metas(index).count();
                    let constraints = self.tc.metas.unsolved_constraints(index).count();
                    if metas + constraints == 0 {
                        Outcome::Ok
                    } else {
                        Outcome::Unsolved { metas, constraints }
                    }
                }
                Err(msg) => {
                    self.abandon(index);
                    Outcome::TypeError(msg)
                }
            };
            let details = match outcome {
                Outcome::Unsolved { .. } => self.unsolved_lines(index),
                _ => Vec::new(),
            };
            let trace = std::mem::take(&mut self.tc.trace);
            let metas = self.meta_lines(index);
            report.decls.push(DeclReport { name, index, span, outcome, expect, details, trace, metas });
        }
        report
    }

    /// Marks what a failed declaration left behind so later ones never revisit it.
    fn abandon(&mut self, index: usize) {
        for c in self.tc.metas.constraints.iter_mut().filter(|c| c.decl == index) {
            if matches!(c.status, Status::Active | Status::Postponed(_) | Status::Delegated(_)) {
                c.status = Status::Failed("abandoned".into());
            }
        }
        if let Some((_, g)) = self.current_global.take() {
            self.tc.globals.get_mut(g).def = GlobalDef::Failed;
        }
    }

    fn process(&mut self, unit: &Unit<'_>) -> Result<(), String> {
        let elab = |e: ElabError| e.to_string();
        match unit {
            Unit::Stray { name, span } => Err(format!("{span}: clause for `{name}` without a signature")),
            Unit::Postulate { name, ty, span } => {
                let (ty_tm, ty_val) = self.signature(ty)?;
                let entry = GlobalEntry { name: (*name).clone(), ty: ty_tm, ty_val, def: GlobalDef::Postulate, line: span.line };
                self.tc.globals.add(entry);
                Ok(())
            }
            Unit::Def { name, ty, span, clauses } => {
                if clauses.is_empty() {
                    return Err(format!("{span}: `{name}` has a signature but no clauses"));
                }
                let (ty_tm, ty_val) = self.signature(ty)?;
                let entry = GlobalEntry {
                    name: (*name).clone(),
                    ty: ty_tm.clone(),
                    ty_val: ty_val.clone(),
                    def: GlobalDef::Pending,
                    line: span.line,
                };
                let g = self.tc.globals.add(entry);
                self.current_global = Some((self.tc.decl, g));
                let mut checked = Vec::new();
                for (pats, rhs, cspan) in clauses {
                    let (patterns, t, depth) = self.tc.check_clause(&ty_val, pats, rhs, *cspan).map_err(elab)?;
                    checked.push((patterns, t, depth, cspan.line));
                }
                self.tc.solve_all()?;
                let ev = self.tc.ev();
                let clauses = checked
                    .into_iter()
                    .map(|(patterns, t, depth, line)| Clause { patterns, rhs: ev.zonk(depth, &t), line })
                    .collect();
                let mut def = ClauseDef::new((*name).clone(), g, ty_tm, clauses);
                check_clauses(&mut def, |d, i| {
                    let c = &d.clauses[i];
                    let v = ev.eval(&identity_env(c.var_count()), &c.rhs);
                    head_kind(&ev.force(&v))
                })
                .map_err(|e| e.to_string())?;
                self.tc.globals.get_mut(g).def = GlobalDef::Clauses(Rc::new(def));
                self.current_global = None;
                Ok(())
            }
        }
    }

    fn signature(&mut self, ty: &Expr) -> Result<(crate::syntax::Tm, crate::value::Val), String> {
        let (t, _) = self.tc.check_type(&mut Ctx::default(), ty).map_err(|e| e.to_string())?;
        self.tc.solve_all()?;
        let ev = self.tc.ev();
        let t = ev.zonk(0, &t);
        let v = ev.eval(&Vec::new(), &t);
        Ok((t, v))
    }

    fn unsolved_lines(&self, index: usize) -> Vec<String> {
        let ev = self.tc.ev();
        let mut metas: Vec<_> = self.tc.metas.unsolved_metas(index).collect();
        metas.sort_by_key(|m| (m.span, m.id));
        let mut out = Vec::new();
        for m in metas {
            let ty = match ev.open_pi(&m.ty_val, 0, m.tele.len()) {
                Some(ty) => show_val(&ev, &m.tele, &ty),
                None => show_val(&ev, &[], &m.ty_val),
            };
            out.push(format!("unsolved meta {} at {} ({}) : {ty}", m.id, m.span, m.reason));
        }
        let mut cs: Vec<_> = self.tc.metas.unsolved_constraints(index).collect();
        cs.sort_by_key(|c| (c.span, c.id));
        for c in cs {
            let (l, r) = (show_val(&ev, &c.names, &c.lhs), show_val(&ev, &c.names, &c.rhs));
            out.push(format!("unsolved constraint #{} at {} : {l} ≈ {r}", c.id, c.span));
        }
        out
    }

    fn meta_lines(&self, index: usize) -> Vec<String> {
        let ev = self.tc.ev();
        self.tc
            .metas
            .metas
            .iter()
            .filter(|m| m.decl == index)
            .map(|m| match &m.solution {
                Some(sol) => format!("{} := {}", m.id, show_term(&self.tc.globals, &[], &ev.zonk(0, sol))),
                None => format!("{} unsolved", m.id),
            })
            .collect()
    }

    pub fn lookup(&self, name: &str) -> Option<GlobalId> {
        self.tc.globals.lookup(name)
    }

    /// Normal form of a checked global.
    pub fn normal_form(&self, name: &str) -> Option<String> {
        let g = self.lookup(name)?;
        let ev = self.tc.ev();
        let t = ev.nf(&Vec::new(), &crate::syntax::Term::Global(g));
        Some(show_term(&self.tc.globals, &[], &t))
    }

    /// Re-verifies every solved constraint by conversion and every solved
    /// meta by checking its solution against its type, without unification.
    pub fn validate(&self) -> Validation {
        let ev = self.tc.ev();
        let mut out = Validation::default();
        for c in self.tc.metas.constraints.iter().filter(|c| c.status == Status::Solved) {
            out.constraints += 1;
            if !conv(&ev, c.names.len(), &c.lhs, &c.rhs) {
                let (l, r) = (show_val(&ev, &c.names, &c.lhs), show_val(&ev, &c.names, &c.rhs));
                out.failures.push(format!("constraint #{}: {l} ≉ {r}", c.id));
            }
        }
        for m in &self.tc.metas.metas {
            let Some(sol) = &m.solution else { continue };
            out.metas += 1;
            let sol = ev.zonk(0, sol);
            if let Err(e) = typecheck::check(&mut Strict(ev), &mut CoreCtx::default(), &sol, &m.ty_val) {
                let shown = show_term(&self.tc.globals, &[], &sol);
                out.failures.push(format!("meta {} := {shown}: {e:?}", m.id));
            }
        }
        out
    }
}

/// Outcome of forcing an alternative clause at one inversion event.
#[derive(Clone, Debug)]
pub struct AlternativeRun {
    pub event: usize,
    pub global: Name,
    pub chosen: usize,
    pub alternative: usize,
    pub decl: Name,
    pub outcome: Outcome,
}

/// For every inversion that fires while checking `src` in a copy of `base`,
/// re-checks the file with each other clause forced at that point.
pub fn inversion_alternatives(base: &Session, src: &str) -> Result<Vec<AlternativeRun>, ParseError> {
    let decls = parse_file(src)?;
    let mut first = base.clone();
    let start = first.tc.inversions.len();
    let report = first.check_decls(&decls);
    let mut runs = Vec::new();
    for (event, inv) in first.tc.inversions.iter().enumerate().skip(start) {
        let decl = report.decls.iter().find(|d| d.index == inv.decl).map(|d| d.name.clone()).unwrap_or_else(|| "?".into());
        for alt in (0..inv.clauses).filter(|&a| a != inv.chosen) {
            let mut s = base.clone();
            s.tc.options.inversion_override = Some((event, alt));
            let r = s.check_decls(&decls);
            let outcome = r.decls.iter().find(|d| d.index == inv.decl).map(|d| d.outcome.clone()).unwrap_or(Outcome::Ok);
            runs.push(AlternativeRun {
                event,
                global: first.tc.globals.get(inv.global).name.clone(),
                chosen: inv.chosen,
                alternative: alt,
                decl: decl.clone(),
                outcome,
            });
        }
    }
    Ok(runs)
}
