//! Unification of values, the constraint queue driver, and meta creation.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::eval::{key_level_term, AtomKey, Ev, MatchResult};
use crate::level::{solve_level, LevelSolution};
use crate::meta::{blockers, has_unsolved, new_meta, solve_meta, MetaReason, SolveError, Status};
use crate::pretty::show_val;
use crate::syntax::{HeadKind, HeadSummary, Icit, Lvl, MetaId, Name, Pattern, Span, Term, Tm};
use crate::tc::{InversionEvent, Tc};
use crate::typecheck::{self, CoreCtx};
use crate::value::{identity_env, Elim, Head, LevelVal, Val, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum UErr {
    /// Blocked on the listed unsolved metas.
    Stuck(BTreeSet<MetaId>),
    Fail(String),
}

pub type UResult = Result<(), UErr>;

/// A partial renaming from the variables of the problem context (`cod`)
/// into the variables of a solution (`dom`).
#[derive(Clone, Debug)]
pub struct Ren {
    dom: usize,
    cod: usize,
    map: HashMap<usize, usize>,
}

impl Ren {
    fn lift(&self) -> Ren {
        let mut map = self.map.clone();
        map.insert(self.cod, self.dom);
        Ren { dom: self.dom + 1, cod: self.cod + 1, map }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RenKind {
    Occurs,
    Scope,
}

#[derive(Clone, Copy, Debug)]
struct RenErr {
    kind: RenKind,
    /// The offending occurrence sits under an unsolved meta or a blocked definition.
    flexible: bool,
}

enum SpineShape {
    Pattern(Vec<(Lvl, Icit)>),
    /// Only applications to variables before a projection.
    Projection(usize),
    Other,
}

fn with_name(names: &[Name], x: &Name) -> Vec<Name> {
    let mut v = names.to_vec();
    v.push(x.clone());
    v
}

fn lams(binders: &[(Name, Icit)], body: Tm) -> Tm {
    binders.iter().rev().fold(body, |b, (x, i)| Rc::new(Term::Lam(x.clone(), *i, b)))
}

/// Reads back `v` under a partial renaming, refusing `occurs`.
fn rename(ev: &Ev<'_>, occurs: Option<MetaId>, ren: &Ren, v: &Val, flex: bool) -> Result<Tm, RenErr> {
    use Value::*;
    let v = ev.force(v);
    let go = |v: &Val| rename(ev, occurs, ren, v, flex);
    let under = |c: &crate::value::Closure| {
        let r2 = ren.lift();
        rename(ev, occurs, &r2, &ev.apply_closure(c, Value::var(crate::syntax::Lvl(ren.cod))), flex)
    };
    let opt = |v: &Option<Val>| v.as_ref().map(go).transpose();
    let opt_under = |c: &Option<crate::value::Closure>| c.as_ref().map(under).transpose();
    let level = |nf: &LevelVal| -> Result<Tm, RenErr> {
        let atoms = nf.atoms().iter().map(|a| go(&a.head).map(|t| (t, a.offset))).collect::<Result<Vec<_>, _>>()?;
        Ok(crate::eval::build_level(atoms, nf.closed_constant()))
    };
    Ok(Rc::new(match &*v {
        Neutral(h, sp) => {
            let (head, flex2) = match h {
                Head::Var(x) => match ren.map.get(&x.0) {
                    Some(y) => (Term::Var(crate::syntax::Lvl(*y).to_ix(ren.dom)), flex),
                    None => return Err(RenErr { kind: RenKind::Scope, flexible: flex }),
                },
                Head::Meta(m) if Some(*m) == occurs => return Err(RenErr { kind: RenKind::Occurs, flexible: flex }),
                Head::Meta(m) => (Term::Meta(*m), true),
                Head::Global(g) => (Term::Global(*g), flex || ev.globals.clauses(*g).is_some()),
            };
            let go2 = |v: &Val| rename(ev, occurs, ren, v, flex2);
            let mut t = Rc::new(head);
            for e in sp {
                t = Rc::new(match e {
                    Elim::App(a, i) => Term::App(t, go2(a)?, *i),
                    Elim::Fst => Term::Fst(t),
                    Elim::Snd => Term::Snd(t),
                    Elim::J(p, pr) => Term::J(go2(p)?, go2(pr)?, t),
                    Elim::Absurd(m) => Term::Absurd(go2(m)?, t),
                    Elim::Lower => Term::Lower(t),
                });
            }
            return Ok(t);
        }
        Lam(x, i, c) => Term::Lam(x.clone(), *i, under(c)?),
        Pi(x, i, a, al, b, bl) => Term::Pi(x.clone(), *i, go(a)?, opt(al)?, under(b)?, opt_under(bl)?),
        Sigma(x, a, al, b, bl) => Term::Sigma(x.clone(), go(a)?, opt(al)?, under(b)?, opt_under(bl)?),
        Pair(a, b) => Term::Pair(go(a)?, go(b)?),
        Unit => Term::Unit,
        Tt => Term::Tt,
        Empty => Term::Empty,
        Nat => Term::Nat,
        Zero => Term::Zero,
        Suc(n) => Term::Suc(go(n)?),
        List(a) => Term::List(go(a)?),
        Nil => Term::Nil,
        Cons(x, xs) => Term::Cons(go(x)?, go(xs)?),
        Id(a, x, y) => Term::Id(go(a)?, go(x)?, go(y)?),
        Refl => Term::Refl,
        Lift(l, a) => Term::Lift(go(l)?, go(a)?),
        LiftIntro(a) => Term::LiftIntro(go(a)?),
        Sort(l) => Term::Sort(level(l)?),
        SortOmega => return Err(RenErr { kind: RenKind::Scope, flexible: false }),
        Level => Term::Level,
        Lvl(l) => return level(l),
    }))
}

/// The rigid shape of a weak-head value, for clause inversion.
pub fn head_kind(v: &Value) -> HeadSummary {
    use Value::*;
    HeadSummary::Rigid(match v {
        Pi(..) => HeadKind::Pi,
        Sigma(..) => HeadKind::Sigma,
        Sort(_) | SortOmega => HeadKind::Sort,
        Nat => HeadKind::Nat,
        List(_) => HeadKind::List,
        Unit => HeadKind::Unit,
        Empty => HeadKind::Empty,
        Id(..) => HeadKind::Id,
        Lift(..) => HeadKind::Lift,
        Level => HeadKind::Level,
        Zero => HeadKind::Zero,
        Suc(_) => HeadKind::Suc,
        Nil => HeadKind::Nil,
        Cons(..) => HeadKind::Cons,
        Tt => HeadKind::Tt,
        Refl => HeadKind::Refl,
        Neutral(..) | Lam(..) | Pair(..) | LiftIntro(_) | Lvl(_) => return HeadSummary::Flexible,
    })
}

impl Tc {
    fn stuck(&self, names: &[Name], vals: &[&Val]) -> UErr {
        let ev = self.ev();
        let mut bs = BTreeSet::new();
        for v in vals {
            bs.extend(blockers(&ev, names.len(), v));
        }
        if bs.is_empty() {
            let shown: Vec<String> = vals.iter().map(|v| show_val(&ev, names, v)).collect();
            UErr::Fail(format!("cannot decide {}", shown.join(" ≈ ")))
        } else {
            UErr::Stuck(bs)
        }
    }

    fn mismatch(&self, names: &[Name], l: &Val, r: &Val) -> UErr {
        let ev = self.ev();
        UErr::Fail(format!("cannot unify {} with {}", show_val(&ev, names, l), show_val(&ev, names, r)))
    }

    fn postponed_status(&mut self, id: usize, bs: BTreeSet<MetaId>) -> Status {
        if bs.iter().any(|m| self.metas.is_solved(*m)) {
            self.metas.enqueue(id);
            Status::Active
        } else {
            Status::Postponed(bs)
        }
    }

    /// Registers `lhs ≈ rhs`, attempts it, and runs woken constraints.
    pub fn constrain(&mut self, names: &[Name], lhs: Val, rhs: Val, span: Span) -> Result<(), String> {
        let id = self.metas.push_constraint(names.to_vec(), lhs, rhs, span, self.decl);
        let res = self.attempt(id);
        if res.is_ok() && !self.draining {
            return self.drain();
        }
        res
    }

    fn attempt(&mut self, id: usize) -> Result<(), String> {
        let c = &self.metas.constraints[id];
        let (names, l, r) = (c.names.clone(), c.lhs.clone(), c.rhs.clone());
        let saved_children = std::mem::take(&mut self.children);
        let saved_span = std::mem::replace(&mut self.span, c.span);
        let res = self.unify(&names, &l, &r);
        let kids = std::mem::replace(&mut self.children, saved_children);
        self.span = saved_span;
        let (status, out) = match res {
            Ok(()) if kids.is_empty() => (Status::Solved, Ok(())),
            Ok(()) => (Status::Delegated(kids), Ok(())),
            Err(UErr::Stuck(bs)) => (self.postponed_status(id, bs), Ok(())),
            Err(UErr::Fail(msg)) => (Status::Failed(msg.clone()), Err(msg)),
        };
        self.metas.constraints[id].status = status;
        out
    }

    /// Re-attempts woken constraints until the queue is empty.
    pub fn drain(&mut self) -> Result<(), String> {
        if self.draining {
            return Ok(());
        }
        self.draining = true;
        let mut res = Ok(());
        while let Some(id) = self.metas.pop_queue() {
            if res.is_ok() && self.metas.constraints[id].status == Status::Active {
                res = self.attempt(id);
            }
        }
        self.draining = false;
        self.metas.settle_delegated();
        res
    }

    /// Runs the queue to a fixpoint, solving unit-typed metas by η when stuck.
    pub fn solve_all(&mut self) -> Result<(), String> {
        loop {
            self.drain()?;
            if !self.eta_pass() {
                break;
            }
        }
        self.metas.settle_delegated();
        Ok(())
    }

    fn eta_pass(&mut self) -> bool {
        let pending: Vec<MetaId> = self.metas.unsolved_metas(self.decl).map(|m| m.id).collect();
        let mut progress = false;
        for m in pending {
            if self.metas.is_solved(m) {
                continue;
            }
            let entry = self.metas.get(m);
            let n = entry.tele.len();
            let ev = self.ev();
            let Some(ty) = ev.open_pi(&entry.ty_val, 0, n) else { continue };
            if let Some(body) = self.unit_value(&ty) {
                let binders = self.meta_binders(m, n);
                let sol = lams(&binders, body);
                if solve_meta(&mut self.metas, &self.globals, m, sol).is_ok() {
                    progress = true;
                }
            }
        }
        progress
    }

    /// The unique inhabitant of a unit-like type.
    fn unit_value(&self, ty: &Val) -> Option<Tm> {
        let ev = self.ev();
        match &*ev.force(ty) {
            Value::Unit => Some(Rc::new(Term::Tt)),
            Value::Lift(_, a) if matches!(&*ev.force(a), Value::Unit) => {
                Some(Rc::new(Term::LiftIntro(Rc::new(Term::Tt))))
            }
            _ => None,
        }
    }

    /// Binder names and implicitness of the first `n` Pis of a meta's type.
    fn meta_binders(&self, m: MetaId, n: usize) -> Vec<(Name, Icit)> {
        let ev = self.ev();
        let mut ty = self.metas.get(m).ty_val.clone();
        let mut out = Vec::new();
        for k in 0..n {
            match &*ev.force(&ty) {
                Value::Pi(x, i, _, _, b, _) => {
                    out.push((x.clone(), *i));
                    ty = ev.apply_closure(b, Value::var(Lvl(k)));
                }
                _ => break,
            }
        }
        out
    }

    /// Creates a meta abstracted over `binders` (variables of a context of
    /// `depth` entries) and returns it applied to them.
    pub fn fresh_meta_in(
        &mut self,
        binders: &[(Name, Icit, Val, Lvl)],
        depth: usize,
        ty: &Val,
        span: Span,
        reason: MetaReason,
    ) -> Tm {
        let ev = self.ev();
        let mut doms = Vec::new();
        let mut ren = Ren { dom: 0, cod: depth, map: HashMap::new() };
        for (i, (_, _, a, l)) in binders.iter().enumerate() {
            ren.dom = i;
            doms.push(rename(&ev, None, &ren, a, false).expect("binder types are in scope"));
            ren.map.insert(l.0, i);
        }
        ren.dom = binders.len();
        let cod = rename(&ev, None, &ren, ty, false).expect("meta types are in scope");
        let closed = binders
            .iter()
            .zip(doms)
            .rev()
            .fold(cod, |acc, ((x, i, _, _), d)| Rc::new(Term::Pi(x.clone(), *i, d, None, acc, None)));
        let tele = binders.iter().map(|b| b.0.clone()).collect();
        let m = new_meta(&mut self.metas, &self.globals, tele, closed, span, reason, self.decl);
        if let Some(body) = self.unit_value(ty) {
            let bs: Vec<(Name, Icit)> = binders.iter().map(|b| (b.0.clone(), b.1)).collect();
            solve_meta(&mut self.metas, &self.globals, m, lams(&bs, body)).expect("fresh meta");
        }
        binders.iter().fold(Rc::new(Term::Meta(m)), |t, (_, i, _, l)| {
            Term::app(t, Rc::new(Term::Var(l.to_ix(depth))), *i)
        })
    }

    /// Unifies, turning a stuck sub-problem into a separate constraint.
    pub(crate) fn sub(&mut self, names: &[Name], l: &Val, r: &Val) -> UResult {
        match self.unify(names, l, r) {
            Err(UErr::Stuck(bs)) => {
                let id = self.metas.push_constraint(names.to_vec(), l.clone(), r.clone(), self.span, self.decl);
                let status = self.postponed_status(id, bs);
                self.metas.constraints[id].status = status;
                self.children.push(id);
                Ok(())
            }
            other => other,
        }
    }

    pub fn unify(&mut self, names: &[Name], l: &Val, r: &Val) -> UResult {
        let ev = self.ev();
        let (l, r) = (ev.force(l), ev.force(r));
        let shown = self.options.trace.then(|| (show_val(&ev, names, &l), show_val(&ev, names, &r)));
        let (rule, res) = self.unify_forced(names, &l, &r);
        if let Some((ls, rs)) = shown {
            let outcome = match &res {
                Ok(()) => "ok".to_string(),
                Err(UErr::Stuck(bs)) => {
                    let ms: Vec<String> = bs.iter().map(|m| m.to_string()).collect();
                    format!("postponed on {}", ms.join(" "))
                }
                Err(UErr::Fail(_)) => "failed".to_string(),
            };
            self.trace.push(format!("RULE {rule} | {ls} ≈ {rs} | {outcome}"));
        }
        res
    }

    fn unify_forced(&mut self, names: &[Name], l: &Val, r: &Val) -> (&'static str, UResult) {
        use Value::*;
        let depth = names.len();
        let ev = self.ev();
        if matches!(**l, Lvl(_)) || matches!(**r, Lvl(_)) {
            let (a, b) = (ev.level_nf(l), ev.level_nf(r));
            return ("level", self.unify_level(names, &a, &b));
        }
        let fresh = Value::var(crate::syntax::Lvl(depth));
        match (&**l, &**r) {
            (Sort(a), Sort(b)) => return ("sort", self.unify_level(names, a, b)),
            (SortOmega, SortOmega) => return ("sort", Ok(())),
            (Lam(x, _, c), Lam(_, _, d)) => {
                let (a, b) = (ev.apply_closure(c, fresh.clone()), ev.apply_closure(d, fresh));
                return ("lambda", self.unify(&with_name(names, x), &a, &b));
            }
            (Lam(x, i, c), Neutral(..)) => {
                let (a, b) = (ev.apply_closure(c, fresh.clone()), ev.apply(r.clone(), fresh, *i));
                return ("eta-lambda", self.unify(&with_name(names, x), &a, &b));
            }
            (Neutral(..), Lam(x, i, c)) => {
                let (a, b) = (ev.apply(l.clone(), fresh.clone(), *i), ev.apply_closure(c, fresh));
                return ("eta-lambda", self.unify(&with_name(names, x), &a, &b));
            }
            _ => {}
        }
        match (&**l, &**r) {
            (Neutral(Head::Meta(m), sp), Neutral(Head::Meta(n), sp2)) if m == n => {
                let same = sp.len() == sp2.len() && crate::conv::conv(&ev, depth, l, r);
                return ("flex-flex", if same { Ok(()) } else { Err(self.stuck(names, &[l, r])) });
            }
            (Neutral(Head::Meta(m), sp), Neutral(Head::Meta(n), sp2)) => {
                return ("flex-flex", self.flex_flex(names, (*m, sp), (*n, sp2), l, r));
            }
            (Neutral(Head::Meta(m), sp), _) => return ("flex-rigid", self.solve_flex(names, *m, sp, r, l, r)),
            (_, Neutral(Head::Meta(m), sp)) => return ("flex-rigid", self.solve_flex(names, *m, sp, l, l, r)),
            _ => {}
        }
        let res = match (&**l, &**r) {
            (Tt, _) | (_, Tt) => return ("eta-unit", Ok(())),
            (Pair(a, b), Pair(c, d)) => ("pair", self.sub(names, a, c).and_then(|_| self.sub(names, b, d))),
            (Pair(a, b), Neutral(..)) => {
                let (fst, snd) = (ev.elim(r.clone(), Elim::Fst), ev.elim(r.clone(), Elim::Snd));
                ("eta-pair", self.sub(names, a, &fst).and_then(|_| self.sub(names, b, &snd)))
            }
            (Neutral(..), Pair(a, b)) => {
                let (fst, snd) = (ev.elim(l.clone(), Elim::Fst), ev.elim(l.clone(), Elim::Snd));
                ("eta-pair", self.sub(names, &fst, a).and_then(|_| self.sub(names, &snd, b)))
            }
            (LiftIntro(a), LiftIntro(b)) => ("lift", self.sub(names, a, b)),
            (LiftIntro(a), Neutral(..)) => ("eta-lift", self.sub(names, a, &ev.elim(r.clone(), Elim::Lower))),
            (Neutral(..), LiftIntro(b)) => ("eta-lift", self.sub(names, &ev.elim(l.clone(), Elim::Lower), b)),
            (Pi(x, i, a, al, b, bl), Pi(_, j, c, cl, d, dl)) => {
                if i != j {
                    return ("decompose-pi", Err(self.mismatch(names, l, r)));
                }
                ("decompose-pi", self.decompose_binder(names, x, (a, al, b, bl), (c, cl, d, dl)))
            }
            (Sigma(x, a, al, b, bl), Sigma(_, c, cl, d, dl)) => {
                ("decompose-sigma", self.decompose_binder(names, x, (a, al, b, bl), (c, cl, d, dl)))
            }
            (Nat, Nat) | (Unit, Unit) | (Empty, Empty) | (Level, Level) | (Zero, Zero) | (Nil, Nil) | (Refl, Refl) => {
                ("rigid", Ok(()))
            }
            (Suc(a), Suc(b)) | (List(a), List(b)) => ("decompose", self.sub(names, a, b)),
            (Cons(a, b), Cons(c, d)) | (Lift(a, b), Lift(c, d)) => {
                ("decompose", self.sub(names, a, c).and_then(|_| self.sub(names, b, d)))
            }
            (Id(a, x, y), Id(b, x2, y2)) => (
                "decompose",
                self.sub(names, a, b).and_then(|_| self.sub(names, x, x2)).and_then(|_| self.sub(names, y, y2)),
            ),
            (Neutral(Head::Var(x), sp), Neutral(Head::Var(y), sp2)) if x == y && sp.len() == sp2.len() => {
                ("spine", self.unify_spine(names, sp, sp2, l, r))
            }
            (Neutral(Head::Global(g), sp), Neutral(Head::Global(h), sp2)) if g == h && sp.len() == sp2.len() => {
                ("spine", self.unify_spine(names, sp, sp2, l, r))
            }
            _ => ("", Ok(())),
        };
        if !res.0.is_empty() {
            return res;
        }
        let lb = self.blocked(l);
        let rb = self.blocked(r);
        match (lb, rb) {
            (Some(_), None) => return ("invert", self.invert(names, l, r, l, r)),
            (None, Some(_)) => return ("invert", self.invert(names, r, l, l, r)),
            (Some(_), Some(_)) => {
                let bs = self.stuck(names, &[l, r]);
                return ("postpone", Err(bs));
            }
            (None, None) => {}
        }
        ("mismatch", Err(self.mismatch(names, l, r)))
    }

    /// A clausal definition applied to enough arguments but unable to unfold.
    fn blocked(&self, v: &Val) -> Option<()> {
        match &**v {
            Value::Neutral(Head::Global(g), sp) => {
                let def = self.globals.clauses(*g)?;
                (def.arity > 0 && sp.len() >= def.arity).then_some(())
            }
            _ => None,
        }
    }

    #[allow(clippy::type_complexity)]
    fn decompose_binder(
        &mut self,
        names: &[Name],
        x: &Name,
        (a, al, b, bl): (&Val, &Option<Val>, &crate::value::Closure, &Option<crate::value::Closure>),
        (c, cl, d, dl): (&Val, &Option<Val>, &crate::value::Closure, &Option<crate::value::Closure>),
    ) -> UResult {
        self.sub(names, a, c)?;
        if let (Some(al), Some(cl)) = (al, cl) {
            self.sub(names, al, cl)?;
        }
        let fresh = Value::var(Lvl(names.len()));
        let inner = with_name(names, x);
        let ev = self.ev();
        let (b1, d1) = (ev.apply_closure(b, fresh.clone()), ev.apply_closure(d, fresh.clone()));
        self.sub(&inner, &b1, &d1)?;
        if let (Some(bl), Some(dl)) = (bl, dl) {
            let ev = self.ev();
            let (b2, d2) = (ev.apply_closure(bl, fresh.clone()), ev.apply_closure(dl, fresh));
            self.sub(&inner, &b2, &d2)?;
        }
        Ok(())
    }

    fn unify_spine(&mut self, names: &[Name], sp: &[Elim], sp2: &[Elim], l: &Val, r: &Val) -> UResult {
        for (e1, e2) in sp.iter().zip(sp2) {
            match (e1, e2) {
                (Elim::App(a, i), Elim::App(b, j)) if i == j => self.sub(names, a, b)?,
                (Elim::Fst, Elim::Fst) | (Elim::Snd, Elim::Snd) | (Elim::Lower, Elim::Lower) => {}
                (Elim::J(p, pr), Elim::J(q, qr)) => {
                    self.sub(names, p, q)?;
                    self.sub(names, pr, qr)?;
                }
                (Elim::Absurd(m), Elim::Absurd(n)) => self.sub(names, m, n)?,
                _ => return Err(self.mismatch(names, l, r)),
            }
        }
        Ok(())
    }

    fn unify_level(&mut self, names: &[Name], a: &LevelVal, b: &LevelVal) -> UResult {
        let depth = names.len();
        let ev = self.ev();
        let ka = a.map_heads(|h| AtomKey(ev.quote(depth, h)));
        let kb = b.map_heads(|h| AtomKey(ev.quote(depth, h)));
        match solve_level(&ka, &kb, |_| true) {
            LevelSolution::Solved(assignments) => {
                for (head, value) in assignments {
                    let ev = self.ev();
                    let env = identity_env(depth);
                    let flex = ev.eval(&env, &head.0);
                    let val = ev.eval(&env, &key_level_term(&value));
                    match &*ev.force(&flex) {
                        Value::Neutral(Head::Meta(m), sp) => match self.spine_shape(sp) {
                            SpineShape::Pattern(vars) => self.pattern_solve(names, *m, &vars, &val)?,
                            SpineShape::Projection(k) => {
                                self.eta_expand_meta(*m, k)?;
                                return self.unify_level(names, a, b);
                            }
                            SpineShape::Other => return Err(self.stuck(names, &[&flex, &val])),
                        },
                        _ => self.unify(names, &flex, &val)?,
                    }
                }
                Ok(())
            }
            LevelSolution::Postponed => {
                let (va, vb) = (Value::level(a.clone()), Value::level(b.clone()));
                Err(self.stuck(names, &[&va, &vb]))
            }
            LevelSolution::Failed => {
                let (va, vb) = (Value::level(a.clone()), Value::level(b.clone()));
                Err(self.mismatch(names, &va, &vb))
            }
        }
    }

    fn spine_shape(&self, sp: &[Elim]) -> SpineShape {
        let ev = self.ev();
        let mut vars: Vec<(Lvl, Icit)> = Vec::new();
        for (k, e) in sp.iter().enumerate() {
            match e {
                Elim::App(a, i) => match &*ev.force(a) {
                    Value::Neutral(Head::Var(x), s) if s.is_empty() => vars.push((*x, *i)),
                    _ => return SpineShape::Other,
                },
                Elim::Fst | Elim::Snd => return SpineShape::Projection(k),
                _ => return SpineShape::Other,
            }
        }
        let distinct: BTreeSet<Lvl> = vars.iter().map(|v| v.0).collect();
        if distinct.len() == vars.len() {
            SpineShape::Pattern(vars)
        } else {
            SpineShape::Other
        }
    }

    fn flex_flex(
        &mut self,
        names: &[Name],
        (m, sp): (MetaId, &[Elim]),
        (n, sp2): (MetaId, &[Elim]),
        l: &Val,
        r: &Val,
    ) -> UResult {
        // Prefer solving the younger meta in terms of the older one.
        let order = if m > n { [(m, sp, r), (n, sp2, l)] } else { [(n, sp2, l), (m, sp, r)] };
        for (meta, spine, other) in order {
            match self.spine_shape(spine) {
                SpineShape::Pattern(vars) => match self.try_pattern_solve(names, meta, &vars, other) {
                    Ok(true) => return Ok(()),
                    Ok(false) => {}
                    Err(e) => return Err(e),
                },
                SpineShape::Projection(k) => {
                    self.eta_expand_meta(meta, k)?;
                    return self.unify(names, l, r);
                }
                SpineShape::Other => {}
            }
        }
        Err(self.stuck(names, &[l, r]))
    }

    fn solve_flex(&mut self, names: &[Name], m: MetaId, sp: &[Elim], other: &Val, l: &Val, r: &Val) -> UResult {
        match self.spine_shape(sp) {
            SpineShape::Pattern(vars) => self.pattern_solve(names, m, &vars, other),
            SpineShape::Projection(k) => {
                self.eta_expand_meta(m, k)?;
                self.unify(names, l, r)
            }
            SpineShape::Other => Err(self.stuck(names, &[l, r])),
        }
    }

    /// `Ok(false)` when the renaming fails, leaving everything untouched.
    fn try_pattern_solve(&mut self, names: &[Name], m: MetaId, vars: &[(Lvl, Icit)], rhs: &Val) -> Result<bool, UErr> {
        let ev = self.ev();
        let ren = Ren { dom: vars.len(), cod: names.len(), map: vars.iter().enumerate().map(|(i, v)| (v.0 .0, i)).collect() };
        match rename(&ev, Some(m), &ren, rhs, false) {
            Ok(body) => {
                self.commit_solution(names, m, vars, body)?;
                Ok(true)
            }
            Err(_) => Ok(false),
        }
    }

    /// Solves `?m vars ≈ rhs` for a spine of distinct variables.
    pub(crate) fn pattern_solve(&mut self, names: &[Name], m: MetaId, vars: &[(Lvl, Icit)], rhs: &Val) -> UResult {
        let ev = self.ev();
        let ren = Ren { dom: vars.len(), cod: names.len(), map: vars.iter().enumerate().map(|(i, v)| (v.0 .0, i)).collect() };
        match rename(&ev, Some(m), &ren, rhs, false) {
            Ok(body) => self.commit_solution(names, m, vars, body),
            Err(e) if e.flexible => {
                let lhs = Value::meta(m);
                Err(self.stuck(names, &[&lhs, rhs]))
            }
            Err(e) => {
                let what = match e.kind {
                    RenKind::Occurs => "occurs check",
                    RenKind::Scope => "scope check",
                };
                let ev = self.ev();
                Err(UErr::Fail(format!("{what} failed solving {m} := {}", show_val(&ev, names, rhs))))
            }
        }
    }

    fn commit_solution(&mut self, names: &[Name], m: MetaId, vars: &[(Lvl, Icit)], body: Tm) -> UResult {
        let binders: Vec<(Name, Icit)> = vars.iter().map(|(x, i)| (names[x.0].clone(), *i)).collect();
        let sol = lams(&binders, body.clone());
        if let Err(e) = solve_meta(&mut self.metas, &self.globals, m, sol) {
            return Err(UErr::Fail(e.to_string()));
        }
        if self.options.trace {
            let shown = crate::pretty::show_term(&self.globals, &binders.iter().map(|b| b.0.clone()).collect::<Vec<_>>(), &body);
            self.trace.push(format!("RULE solve | {m} ≈ {shown} | solved"));
        }
        self.check_solution_type(m)
    }

    /// Checks a fresh solution against its meta's type when that type still
    /// has unknowns, so that the unknowns are learned from the solution.
    fn check_solution_type(&mut self, m: MetaId) -> UResult {
        let ev = self.ev();
        let entry = self.metas.get(m);
        let ty = ev.zonk(0, &entry.ty);
        if !has_unsolved(&self.metas, &ty) {
            return Ok(());
        }
        let sol = entry.solution.clone().expect("just solved");
        let ty_val = ev.eval(&Vec::new(), &ty);
        match typecheck::check(self, &mut CoreCtx::default(), &sol, &ty_val) {
            Ok(()) | Err(typecheck::TcError::CannotInfer) => Ok(()),
            Err(typecheck::TcError::Mismatch(msg)) => Err(UErr::Fail(msg)),
        }
    }

    /// Solves `m` by a pair of fresh metas (or the unit value) after `k` arguments.
    fn eta_expand_meta(&mut self, m: MetaId, k: usize) -> UResult {
        let ev = self.ev();
        let mut ty = self.metas.get(m).ty_val.clone();
        let mut binders = Vec::new();
        for j in 0..k {
            match &*ev.force(&ty) {
                Value::Pi(x, i, a, _, b, _) => {
                    binders.push((x.clone(), *i, a.clone(), Lvl(j)));
                    ty = ev.apply_closure(b, Value::var(Lvl(j)));
                }
                _ => return Err(UErr::Stuck(BTreeSet::from([m]))),
            }
        }
        let plain: Vec<(Name, Icit)> = binders.iter().map(|b| (b.0.clone(), b.1)).collect();
        let body = match &*ev.force(&ty) {
            Value::Sigma(_, a, _, b, _) => {
                let b = b.clone();
                let fst = self.fresh_meta_in(&binders, k, a, self.metas.get(m).span, MetaReason::Eta);
                let ev = self.ev();
                let fst_val = ev.eval(&identity_env(k), &fst);
                let snd_ty = ev.apply_closure(&b, fst_val);
                let snd = self.fresh_meta_in(&binders, k, &snd_ty, self.metas.get(m).span, MetaReason::Eta);
                Rc::new(Term::Pair(fst, snd))
            }
            _ => match self.unit_value(&ty) {
                Some(t) => t,
                None => return Err(UErr::Stuck(BTreeSet::from([m]))),
            },
        };
        if self.options.trace {
            self.trace.push(format!("RULE eta-meta | {m} ≈ {} | solved", crate::pretty::show_term(&self.globals, &plain.iter().map(|b| b.0.clone()).collect::<Vec<_>>(), &body)));
        }
        solve_meta(&mut self.metas, &self.globals, m, lams(&plain, body)).map_err(|e: SolveError| UErr::Fail(e.to_string()))
    }

    /// Inverts a stuck clausal definition `blocked` against the rigid `other`.
    fn invert(&mut self, names: &[Name], blocked: &Val, other: &Val, l: &Val, r: &Val) -> UResult {
        let depth = names.len();
        let ev = self.ev();
        let Value::Neutral(Head::Global(g), sp) = &**blocked else { unreachable!("checked by caller") };
        let def = self.globals.clauses(*g).expect("checked by caller").clone();
        let args: Vec<Val> = sp[..def.arity]
            .iter()
            .map(|e| match e {
                Elim::App(a, _) => a.clone(),
                _ => unreachable!("blocked spines start with applications"),
            })
            .collect();
        let Some(pos) = def.single_matched_position() else {
            return Err(self.stuck_or_mismatch(names, l, r));
        };
        let scrutinee = ev.force(&args[pos]);
        let (m, msp) = match &*scrutinee {
            Value::Neutral(Head::Meta(m), msp) => (*m, msp.clone()),
            _ => return Err(self.stuck_or_mismatch(names, l, r)),
        };
        let SpineShape::Pattern(mvars) = self.spine_shape(&msp) else {
            return Err(self.stuck(names, &[l, r]));
        };
        // Heads of every clause with the actual arguments substituted.
        let mut heads = Vec::new();
        for c in &def.clauses {
            let mut env = Vec::new();
            let mut next = depth;
            for (p, (a, pat)) in args.iter().zip(&c.patterns).enumerate() {
                if p == pos {
                    for _ in 0..pat.var_count() {
                        env.push(Value::var(Lvl(next)));
                        next += 1;
                    }
                } else {
                    env.push(a.clone());
                }
            }
            let v = ev.apply_spine(ev.eval(&env, &c.rhs), &sp[def.arity..]);
            heads.push(head_kind(&ev.force(&v)));
        }
        let distinct = heads.iter().enumerate().all(|(i, h)| {
            matches!(h, HeadSummary::Rigid(_)) && heads[..i].iter().all(|h2| h2 != h)
        });
        if !distinct {
            return Err(self.stuck(names, &[l, r]));
        }
        let target = head_kind(other);
        let Some(mut chosen) = heads.iter().position(|h| *h == target) else {
            return Err(self.mismatch(names, l, r));
        };
        if let Some((event, alt)) = self.options.inversion_override {
            if event == self.inversions.len() {
                chosen = alt;
            }
        }
        self.inversions.push(InversionEvent { decl: self.decl, global: *g, chosen, clauses: def.clauses.len() });
        let pattern = def.clauses[chosen].patterns[pos].clone();
        let shown = self.options.trace.then(|| {
            let ev = self.ev();
            (show_val(&ev, names, l), show_val(&ev, names, r))
        });
        self.instantiate_pattern(m, mvars.len(), &pattern)?;
        if let Some((ls, rs)) = shown {
            let name = self.globals.get(*g).name.clone();
            self.trace.push(format!("RULE invert | {ls} ≈ {rs} | clause {} of {name}: {m} := {pattern}", chosen + 1));
        }
        self.unify(names, l, r)
    }

    fn stuck_or_mismatch(&self, names: &[Name], l: &Val, r: &Val) -> UErr {
        match self.stuck(names, &[l, r]) {
            UErr::Stuck(bs) => UErr::Stuck(bs),
            UErr::Fail(_) => self.mismatch(names, l, r),
        }
    }

    /// Solves `m` (abstracted over `k` variables) with a constructor pattern
    /// whose variables become fresh metas.
    fn instantiate_pattern(&mut self, m: MetaId, k: usize, p: &Pattern) -> UResult {
        let ev = self.ev();
        let mut ty = self.metas.get(m).ty_val.clone();
        let mut binders = Vec::new();
        for j in 0..k {
            match &*ev.force(&ty) {
                Value::Pi(x, i, a, _, b, _) => {
                    binders.push((x.clone(), *i, a.clone(), Lvl(j)));
                    ty = ev.apply_closure(b, Value::var(Lvl(j)));
                }
                _ => return Err(UErr::Stuck(BTreeSet::from([m]))),
            }
        }
        let span = self.metas.get(m).span;
        let body = self.pattern_term(&binders, k, &ty, p, span)?;
        let plain: Vec<(Name, Icit)> = binders.iter().map(|b| (b.0.clone(), b.1)).collect();
        solve_meta(&mut self.metas, &self.globals, m, lams(&plain, body)).map_err(|e| UErr::Fail(e.to_string()))
    }

    fn pattern_term(&mut self, binders: &[(Name, Icit, Val, Lvl)], k: usize, ty: &Val, p: &Pattern, span: Span) -> Result<Tm, UErr> {
        use crate::syntax::Ctor;
        let Pattern::Ctor(c, ps) = p else {
            return Ok(self.fresh_meta_in(binders, k, ty, span, MetaReason::Inversion));
        };
        let ev = self.ev();
        let ty = ev.force(ty);
        let fail = || UErr::Fail(format!("pattern {p} does not fit its type"));
        Ok(Rc::new(match (c, &*ty) {
            (Ctor::Zero, Value::Nat) => Term::Zero,
            (Ctor::Suc, Value::Nat) => Term::Suc(self.pattern_term(binders, k, &ty, &ps[0], span)?),
            (Ctor::Nil, Value::List(_)) => Term::Nil,
            (Ctor::Cons, Value::List(a)) => {
                let head = self.pattern_term(binders, k, a, &ps[0], span)?;
                let tail = self.pattern_term(binders, k, &ty, &ps[1], span)?;
                Term::Cons(head, tail)
            }
            _ => return Err(fail()),
        }))
    }

    /// Whether the arguments of a blocked definition could still change.
    pub fn match_is_flexible(&self, v: &Val) -> bool {
        let ev = self.ev();
        match &*ev.force(v) {
            Value::Neutral(Head::Global(g), sp) => {
                let Some(def) = self.globals.clauses(*g) else { return false };
                let args: Vec<Val> = sp
                    .iter()
                    .take(def.arity)
                    .filter_map(|e| match e {
                        Elim::App(a, _) => Some(a.clone()),
                        _ => None,
                    })
                    .collect();
                matches!(ev.match_clauses(def, &args), MatchResult::Stuck)
            }
            _ => false,
        }
    }
}
