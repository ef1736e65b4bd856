//! Bidirectional elaboration of surface syntax into core terms.

use std::rc::Rc;

use thiserror::Error;

use crate::level::LevelNF;
use crate::meta::MetaReason;
use crate::surface::{Expr, SPattern};
use crate::syntax::{map_children, Ctor, Icit, Ix, Lvl, Name, Pattern, Span, Term, Tm};
use crate::tc::Tc;
use crate::value::{Closure, Env, Val, Value};

#[derive(Clone, Debug, Error, PartialEq)]
#[error("{span}: {msg}")]
pub struct ElabError {
    pub msg: String,
    pub span: Span,
}

type EResult<T> = Result<T, ElabError>;

fn err<T>(span: Span, msg: impl Into<String>) -> EResult<T> {
    Err(ElabError { msg: msg.into(), span })
}

/// The local context: bound variables, let definitions and their types.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub names: Vec<Name>,
    pub types: Vec<Val>,
    pub env: Env,
    /// False for let definitions, which metas do not abstract over.
    bound: Vec<bool>,
    /// False for binders the user cannot refer to.
    visible: Vec<bool>,
}

impl Ctx {
    pub fn depth(&self) -> usize {
        self.env.len()
    }

    pub fn bind(&mut self, x: Name, ty: Val, visible: bool) -> Val {
        let v = Value::var(Lvl(self.depth()));
        self.push(x, ty, v.clone(), true, visible);
        v
    }

    fn define(&mut self, x: Name, ty: Val, v: Val) {
        self.push(x, ty, v, false, true);
    }

    fn push(&mut self, x: Name, ty: Val, v: Val, bound: bool, visible: bool) {
        self.visible.push(visible && &*x != "_");
        self.names.push(x);
        self.types.push(ty);
        self.env.push(v);
        self.bound.push(bound);
    }

    pub fn pop(&mut self) {
        self.names.pop();
        self.types.pop();
        self.env.pop();
        self.bound.pop();
        self.visible.pop();
    }

    fn lookup(&self, x: &str) -> Option<(Ix, Val)> {
        (0..self.depth())
            .rev()
            .find(|&i| self.visible[i] && &*self.names[i] == x)
            .map(|i| (Lvl(i).to_ix(self.depth()), self.types[i].clone()))
    }

    fn binders(&self) -> Vec<(Name, Icit, Val, Lvl)> {
        (0..self.depth())
            .filter(|&i| self.bound[i])
            .map(|i| (self.names[i].clone(), Icit::Expl, self.types[i].clone(), Lvl(i)))
            .collect()
    }
}

/// The level of a type, or the limit sort.
#[derive(Clone, Debug)]
pub enum SortLv {
    Lv(Val),
    Omega,
}

const BUILTINS: [&str; 26] = [
    "Set", "Level", "lzero", "lsuc", "lmax", "Nat", "zero", "suc", "List", "nil", "cons", "Unit", "tt", "Empty",
    "absurd", "Id", "refl", "J", "Lift", "lift", "lower", "fst", "snd", "Sigma", "Pi", "Omega",
];

pub fn is_builtin(x: &str) -> bool {
    BUILTINS[..23].contains(&x)
}

fn tm(t: Term) -> Tm {
    Rc::new(t)
}

fn v(i: usize) -> Tm {
    tm(Term::Var(Ix(i)))
}

fn pi(x: &str, i: Icit, a: Tm, b: Tm) -> Tm {
    tm(Term::Pi(x.into(), i, a, None, b, None))
}

fn sort(l: Tm) -> Tm {
    tm(Term::Sort(l))
}

fn set0() -> Tm {
    sort(tm(Term::LZero))
}

/// Signature and number of argument positions of a builtin usable as a
/// function; the core form is built by [`build_builtin`].
fn builtin_sig(x: &str) -> Option<(Tm, usize)> {
    use Icit::{Expl as E, Impl as I};
    let level = || tm(Term::Level);
    Some(match x {
        "Level" | "Nat" | "Unit" | "Empty" => (set0(), 0),
        "lzero" => (level(), 0),
        "lsuc" => (pi("l", E, level(), level()), 1),
        "lmax" => (pi("a", E, level(), pi("b", E, level(), level())), 2),
        "zero" => (tm(Term::Nat), 0),
        "suc" => (pi("n", E, tm(Term::Nat), tm(Term::Nat)), 1),
        "tt" => (tm(Term::Unit), 0),
        "List" => (pi("l", I, level(), pi("A", E, sort(v(0)), sort(v(1)))), 2),
        "nil" => (pi("l", I, level(), pi("A", I, sort(v(0)), tm(Term::List(v(0))))), 2),
        "cons" => (
            pi("l", I, level(), pi("A", I, sort(v(0)), pi("x", E, v(0), pi("xs", E, tm(Term::List(v(1))), tm(Term::List(v(2))))))),
            4,
        ),
        "Id" => (pi("l", I, level(), pi("A", E, sort(v(0)), pi("x", E, v(0), pi("y", E, v(1), sort(v(3)))))), 4),
        "refl" => (pi("l", I, level(), pi("A", I, sort(v(0)), pi("x", I, v(0), tm(Term::Id(v(1), v(0), v(0)))))), 3),
        "absurd" => (pi("l", I, level(), pi("A", E, sort(v(0)), pi("e", E, tm(Term::Empty), v(1)))), 3),
        "Lift" => (
            pi("a", I, level(), pi("l", E, level(), pi("A", E, sort(v(1)), sort(tm(Term::LMax(v(1), v(2))))))),
            3,
        ),
        "lift" => (
            pi("a", I, level(), pi("l", I, level(), pi("A", I, sort(v(1)), pi("x", E, v(0), tm(Term::Lift(v(2), v(1))))))),
            4,
        ),
        "lower" => (
            pi("a", I, level(), pi("l", I, level(), pi("A", I, sort(v(1)), pi("x", E, tm(Term::Lift(v(1), v(0))), v(1))))),
            4,
        ),
        "fst" | "snd" => {
            let sigma = tm(Term::Sigma("x".into(), v(1), None, tm(Term::App(v(1), v(0), E)), None));
            let result = if x == "fst" { v(2) } else { tm(Term::App(v(1), tm(Term::Fst(v(0))), E)) };
            let b_ty = pi("x", E, v(0), sort(v(2)));
            (pi("a", I, level(), pi("b", I, level(), pi("A", I, sort(v(1)), pi("B", I, b_ty, pi("p", E, sigma, result))))), 5)
        }
        _ => return None,
    })
}

fn build_builtin(x: &str, a: &[Tm]) -> Tm {
    tm(match x {
        "Level" => Term::Level,
        "Nat" => Term::Nat,
        "Unit" => Term::Unit,
        "Empty" => Term::Empty,
        "lzero" => Term::LZero,
        "lsuc" => Term::LSuc(a[0].clone()),
        "lmax" => Term::LMax(a[0].clone(), a[1].clone()),
        "zero" => Term::Zero,
        "suc" => Term::Suc(a[0].clone()),
        "tt" => Term::Tt,
        "List" => Term::List(a[1].clone()),
        "nil" => Term::Nil,
        "cons" => Term::Cons(a[2].clone(), a[3].clone()),
        "Id" => Term::Id(a[1].clone(), a[2].clone(), a[3].clone()),
        "refl" => Term::Refl,
        "absurd" => Term::Absurd(a[1].clone(), a[2].clone()),
        "Lift" => Term::Lift(a[1].clone(), a[2].clone()),
        "lift" => Term::LiftIntro(a[3].clone()),
        "lower" => Term::Lower(a[3].clone()),
        "fst" => Term::Fst(a[4].clone()),
        "snd" => Term::Snd(a[4].clone()),
        _ => unreachable!("not a builtin function: {x}"),
    })
}

/// Weakens `t` by `by` binders.
fn shift(t: &Tm, by: usize) -> Tm {
    fn go(t: &Term, by: usize, cutoff: usize) -> Tm {
        match t {
            Term::Var(Ix(i)) if *i >= cutoff => tm(Term::Var(Ix(i + by))),
            _ => tm(map_children(t, |c, under| go(c, by, cutoff + under))),
        }
    }
    if by == 0 {
        t.clone()
    } else {
        go(t, by, 0)
    }
}

impl Tc {
    fn fail<T>(&self, span: Span, msg: String) -> EResult<T> {
        err(span, msg)
    }

    /// Records `l ≈ r` and reports a failure at `span`.
    pub fn unify_at(&mut self, ctx: &Ctx, l: &Val, r: &Val, span: Span) -> EResult<()> {
        self.constrain(&ctx.names, l.clone(), r.clone(), span).map_err(|msg| ElabError { msg, span })
    }

    pub fn fresh_meta(&mut self, ctx: &Ctx, ty: &Val, span: Span, reason: MetaReason) -> Tm {
        self.fresh_meta_in(&ctx.binders(), ctx.depth(), ty, span, reason)
    }

    fn eval_ctx(&self, ctx: &Ctx, t: &Tm) -> Val {
        self.ev().eval(&ctx.env, t)
    }

    fn show(&self, ctx: &Ctx, v: &Val) -> String {
        crate::pretty::show_val(&self.ev(), &ctx.names, v)
    }

    /// A fresh type together with its level.
    fn fresh_type(&mut self, ctx: &Ctx, span: Span) -> (Tm, Val) {
        let l = self.fresh_meta(ctx, &Rc::new(Value::Level), span, MetaReason::Level);
        let lv = self.eval_ctx(ctx, &l);
        let ty = Value::sort(self.ev().level_nf(&lv));
        let a = self.fresh_meta(ctx, &ty, span, MetaReason::Type);
        (a, lv)
    }

    fn level_term(&self, ctx: &Ctx, l: &Val, depth_extra: usize) -> Tm {
        let ev = self.ev();
        ev.quote_level(ctx.depth() + depth_extra, &ev.level_nf(l))
    }

    /// Elaborates `e` as a type.
    pub fn check_type(&mut self, ctx: &mut Ctx, e: &Expr) -> EResult<(Tm, SortLv)> {
        let (t, ty) = self.infer(ctx, e)?;
        let ty = self.ev().force(&ty);
        match &*ty {
            Value::Sort(l) => Ok((t, SortLv::Lv(Value::level(l.clone())))),
            Value::SortOmega => Ok((t, SortLv::Omega)),
            Value::Neutral(..) => {
                let l = self.fresh_meta(ctx, &Rc::new(Value::Level), e.span(), MetaReason::Level);
                let lv = self.eval_ctx(ctx, &l);
                let s = Value::sort(self.ev().level_nf(&lv));
                self.unify_at(ctx, &ty, &s, e.span())?;
                Ok((t, SortLv::Lv(lv)))
            }
            _ => self.fail(e.span(), format!("expected a type, found a term of type {}", self.show(ctx, &ty))),
        }
    }

    fn insert_implicits(&mut self, ctx: &Ctx, mut t: Tm, mut ty: Val, span: Span) -> (Tm, Val) {
        loop {
            let forced = self.ev().force(&ty);
            match &*forced {
                Value::Pi(_, Icit::Impl, a, _, b, _) => {
                    let (a, b) = (a.clone(), b.clone());
                    let m = self.fresh_meta(ctx, &a, span, MetaReason::Implicit);
                    let mv = self.eval_ctx(ctx, &m);
                    t = Term::app(t, m, Icit::Impl);
                    ty = self.ev().apply_closure(&b, mv);
                }
                _ => return (t, forced),
            }
        }
    }

    pub fn check(&mut self, ctx: &mut Ctx, e: &Expr, ty: &Val) -> EResult<Tm> {
        let ty = self.ev().force(ty);
        match (e, &*ty) {
            (Expr::Lam(x, i, b), Value::Pi(_, j, a, _, c, _)) if i == j => {
                let c = c.clone();
                let var = ctx.bind(x.clone(), a.clone(), true);
                let cod = self.ev().apply_closure(&c, var);
                let r = self.check(ctx, b, &cod);
                ctx.pop();
                Ok(tm(Term::Lam(x.clone(), *i, r?)))
            }
            (_, Value::Pi(x, Icit::Impl, a, _, c, _)) => {
                let c = c.clone();
                let var = ctx.bind(x.clone(), a.clone(), false);
                let cod = self.ev().apply_closure(&c, var);
                let r = self.check(ctx, e, &cod);
                ctx.pop();
                Ok(tm(Term::Lam(x.clone(), Icit::Impl, r?)))
            }
            (Expr::Pair(a, b), Value::Sigma(_, fst_ty, _, snd_ty, _)) => {
                let snd_ty = snd_ty.clone();
                let at = self.check(ctx, a, fst_ty)?;
                let av = self.eval_ctx(ctx, &at);
                let snd_ty = self.ev().apply_closure(&snd_ty, av);
                let bt = self.check(ctx, b, &snd_ty)?;
                Ok(tm(Term::Pair(at, bt)))
            }
            (Expr::Hole(span), _) => Ok(self.fresh_meta(ctx, &ty, *span, MetaReason::Underscore)),
            (Expr::Num(n, _), Value::Nat) => Ok(Term::numeral(*n)),
            (Expr::Let(x, ann, d, body), _) => {
                let (a, dt) = self.let_bound(ctx, ann.as_deref(), d)?;
                let a_val = self.eval_ctx(ctx, &a);
                let d_val = self.eval_ctx(ctx, &dt);
                ctx.define(x.clone(), a_val, d_val);
                let r = self.check(ctx, body, &ty);
                ctx.pop();
                Ok(tm(Term::Let(x.clone(), a, dt, r?)))
            }
            _ => {
                if let Some(t) = self.check_intro(ctx, e, &ty)? {
                    return Ok(t);
                }
                let (t, inferred) = self.infer(ctx, e)?;
                let (t, inferred) = self.insert_implicits(ctx, t, inferred, e.span());
                if matches!(*ty, Value::SortOmega) && matches!(*inferred, Value::Sort(_) | Value::SortOmega) {
                    return Ok(t);
                }
                self.unify_at(ctx, &inferred, &ty, e.span())?;
                Ok(t)
            }
        }
    }

    /// Builtin introduction forms checked directly against their type.
    fn check_intro(&mut self, ctx: &mut Ctx, e: &Expr, ty: &Val) -> EResult<Option<Tm>> {
        let (head, args) = e.spine();
        let Expr::Ident(x, span) = head else { return Ok(None) };
        if !self.is_builtin_here(ctx, x) || args.iter().any(|(_, i)| *i == Icit::Impl) {
            return Ok(None);
        }
        let r = match (&**x, args.len(), &**ty) {
            ("refl", 0, Value::Id(_, a, b)) => {
                let (a, b) = (a.clone(), b.clone());
                self.unify_at(ctx, &a, &b, *span)?;
                tm(Term::Refl)
            }
            ("tt", 0, Value::Unit) => tm(Term::Tt),
            ("nil", 0, Value::List(_)) => tm(Term::Nil),
            ("zero", 0, Value::Nat) => tm(Term::Zero),
            ("suc", 1, Value::Nat) => tm(Term::Suc(self.check(ctx, args[0].0, ty)?)),
            ("cons", 2, Value::List(a)) => {
                let a = a.clone();
                let h = self.check(ctx, args[0].0, &a)?;
                let t = self.check(ctx, args[1].0, ty)?;
                tm(Term::Cons(h, t))
            }
            ("lift", 1, Value::Lift(_, a)) => {
                let a = a.clone();
                tm(Term::LiftIntro(self.check(ctx, args[0].0, &a)?))
            }
            _ => return Ok(None),
        };
        Ok(Some(r))
    }

    fn is_builtin_here(&self, ctx: &Ctx, x: &str) -> bool {
        is_builtin(x) && ctx.lookup(x).is_none() && self.globals.lookup(x).is_none()
    }

    fn let_bound(&mut self, ctx: &mut Ctx, ann: Option<&Expr>, d: &Expr) -> EResult<(Tm, Tm)> {
        match ann {
            Some(a) => {
                let (a, _) = self.check_type(ctx, a)?;
                let a_val = self.eval_ctx(ctx, &a);
                let dt = self.check(ctx, d, &a_val)?;
                Ok((a, dt))
            }
            None => {
                let (dt, a_val) = self.infer(ctx, d)?;
                let (dt, a_val) = self.insert_implicits(ctx, dt, a_val, d.span());
                Ok((self.ev().quote(ctx.depth(), &a_val), dt))
            }
        }
    }

    pub fn infer(&mut self, ctx: &mut Ctx, e: &Expr) -> EResult<(Tm, Val)> {
        match e {
            Expr::Ident(..) | Expr::App(..) => self.infer_app(ctx, e),
            Expr::Hole(span) => {
                let (a, _) = self.fresh_type(ctx, *span);
                let a_val = self.eval_ctx(ctx, &a);
                let t = self.fresh_meta(ctx, &a_val, *span, MetaReason::Underscore);
                Ok((t, a_val))
            }
            Expr::Num(n, _) => Ok((Term::numeral(*n), Rc::new(Value::Nat))),
            Expr::Lam(x, i, b) => {
                let (a, _) = self.fresh_type(ctx, b.span());
                let a_val = self.eval_ctx(ctx, &a);
                ctx.bind(x.clone(), a_val, true);
                let r = self.infer(ctx, b);
                let (bt, b_ty) = match r {
                    Ok((bt, b_ty)) => {
                        let (bt, b_ty) = self.insert_implicits(ctx, bt, b_ty, b.span());
                        (bt, self.ev().quote(ctx.depth(), &b_ty))
                    }
                    Err(e) => {
                        ctx.pop();
                        return Err(e);
                    }
                };
                ctx.pop();
                let ty = Rc::new(Value::Pi(x.clone(), *i, self.eval_ctx(ctx, &a), None, Closure { env: ctx.env.clone(), body: b_ty }, None));
                Ok((tm(Term::Lam(x.clone(), *i, bt)), ty))
            }
            Expr::Pi(x, i, a, b) => self.infer_binder(ctx, x, Some(*i), a, b),
            Expr::Sigma(x, a, b) => self.infer_binder(ctx, x, None, a, b),
            Expr::Pair(a, b) => {
                let (at, a_ty) = self.infer(ctx, a)?;
                let (bt, b_ty) = self.infer(ctx, b)?;
                let body = self.ev().quote(ctx.depth() + 1, &b_ty);
                let ty = Rc::new(Value::Sigma("_".into(), a_ty, None, Closure { env: ctx.env.clone(), body }, None));
                Ok((tm(Term::Pair(at, bt)), ty))
            }
            Expr::Ann(x, t) => {
                let (tt, _) = self.check_type(ctx, t)?;
                let ty = self.eval_ctx(ctx, &tt);
                let xt = self.check(ctx, x, &ty)?;
                Ok((xt, ty))
            }
            Expr::Let(x, ann, d, body) => {
                let (a, dt) = self.let_bound(ctx, ann.as_deref(), d)?;
                let a_val = self.eval_ctx(ctx, &a);
                let d_val = self.eval_ctx(ctx, &dt);
                ctx.define(x.clone(), a_val, d_val);
                let r = self.infer(ctx, body);
                ctx.pop();
                let (bt, b_ty) = r?;
                Ok((tm(Term::Let(x.clone(), a, dt, bt)), b_ty))
            }
        }
    }

    /// Pi (`icit` given) or Sigma types.
    fn infer_binder(&mut self, ctx: &mut Ctx, x: &Name, icit: Option<Icit>, a: &Expr, b: &Expr) -> EResult<(Tm, Val)> {
        let (at, la) = self.check_type(ctx, a)?;
        let a_val = self.eval_ctx(ctx, &at);
        ctx.bind(x.clone(), a_val, true);
        let r = self.check_type(ctx, b).and_then(|(bt, lb)| {
            if let SortLv::Lv(l) = &lb {
                self.strengthen_level(ctx, l, b.span())?;
            }
            Ok((bt, lb))
        });
        let (bt, lb) = match r {
            Ok(r) => r,
            Err(e) => {
                ctx.pop();
                return Err(e);
            }
        };
        let bl = match &lb {
            SortLv::Lv(l) => Some(self.level_term(ctx, l, 0)),
            SortLv::Omega => None,
        };
        ctx.pop();
        let al = match &la {
            SortLv::Lv(l) => Some(self.level_term(ctx, l, 0)),
            SortLv::Omega => None,
        };
        let sort = match (&la, &lb, &bl) {
            (SortLv::Lv(la), SortLv::Lv(lb), Some(bl)) if !bl.mentions_var(0) => {
                let ev = self.ev();
                Value::sort(ev.level_nf(la).max(&ev.level_nf(lb)))
            }
            _ => Rc::new(Value::SortOmega),
        };
        let t = match icit {
            Some(i) => Term::Pi(x.clone(), i, at, al, bt, bl),
            None => Term::Sigma(x.clone(), at, al, bt, bl),
        };
        Ok((tm(t), sort))
    }

    /// Keeps level metas of a codomain from depending on the binder just
    /// introduced, so that only rigid dependencies push a type into the
    /// limit sort.
    fn strengthen_level(&mut self, ctx: &Ctx, l: &Val, span: Span) -> EResult<()> {
        let ev = self.ev();
        let nf = ev.level_nf(l);
        let flexible: Vec<Val> = nf
            .atoms()
            .iter()
            .map(|a| ev.force(&a.head))
            .filter(|h| h.flex_meta().is_some() && ev.quote(ctx.depth(), h).mentions_var(0))
            .collect();
        for h in flexible {
            let mut outer = ctx.clone();
            outer.pop();
            let k = self.fresh_meta(&outer, &Rc::new(Value::Level), span, MetaReason::Level);
            let kv = self.eval_ctx(&outer, &k);
            self.unify_at(ctx, &h, &kv, span)?;
        }
        Ok(())
    }

    fn infer_app(&mut self, ctx: &mut Ctx, e: &Expr) -> EResult<(Tm, Val)> {
        let (head, args) = e.spine();
        let args: Vec<(&Expr, Icit)> = args;
        if let Expr::Ident(x, span) = head {
            if let Some((ix, ty)) = ctx.lookup(x) {
                return self.apply_args(ctx, tm(Term::Var(ix)), ty, &args, *span);
            }
            if let Some(g) = self.globals.lookup(x) {
                let ty = self.globals.get(g).ty_val.clone();
                return self.apply_args(ctx, tm(Term::Global(g)), ty, &args, *span);
            }
            if is_builtin(x) {
                return self.infer_builtin(ctx, x, *span, &args);
            }
            return self.fail(*span, format!("unbound name `{x}`"));
        }
        let (t, ty) = self.infer(ctx, head)?;
        self.apply_args(ctx, t, ty, &args, head.span())
    }

    fn apply_args(&mut self, ctx: &mut Ctx, mut t: Tm, mut ty: Val, args: &[(&Expr, Icit)], span: Span) -> EResult<(Tm, Val)> {
        for (a, icit) in args {
            if *icit == Icit::Expl {
                (t, ty) = self.insert_implicits(ctx, t, ty, a.span());
            }
            let forced = self.ev().force(&ty);
            let (dom, cod) = match &*forced {
                Value::Pi(_, j, dom, _, cod, _) if j == icit => (dom.clone(), cod.clone()),
                Value::Pi(..) => return self.fail(a.span(), "unexpected implicit argument".into()),
                Value::Neutral(..) if *icit == Icit::Expl => {
                    let pi = self.fresh_pi(ctx, a.span());
                    self.unify_at(ctx, &forced, &pi, span)?;
                    match &*pi {
                        Value::Pi(_, _, dom, _, cod, _) => (dom.clone(), cod.clone()),
                        _ => unreachable!(),
                    }
                }
                _ => {
                    return self.fail(span, format!("not a function: its type is {}", self.show(ctx, &forced)));
                }
            };
            let at = self.check(ctx, a, &dom)?;
            let av = self.eval_ctx(ctx, &at);
            t = Term::app(t, at, *icit);
            ty = self.ev().apply_closure(&cod, av);
        }
        Ok((t, ty))
    }

    /// `(x : ?A) -> ?B x` with fresh metas.
    fn fresh_pi(&mut self, ctx: &mut Ctx, span: Span) -> Val {
        let (a, la) = self.fresh_type(ctx, span);
        let a_val = self.eval_ctx(ctx, &a);
        ctx.bind("x".into(), a_val.clone(), false);
        let (b, lb) = self.fresh_type(ctx, span);
        let bl = self.level_term(ctx, &lb, 0);
        ctx.pop();
        let al = self.ev().quote(ctx.depth(), &la);
        let al = Some(self.eval_ctx(ctx, &al));
        Rc::new(Value::Pi("x".into(), Icit::Expl, a_val, al, Closure { env: ctx.env.clone(), body: b }, Some(Closure { env: ctx.env.clone(), body: bl })))
    }

    /// `(x : ?A) * ?B x` with fresh metas.
    fn fresh_sigma(&mut self, ctx: &mut Ctx, span: Span) -> Val {
        let (a, la) = self.fresh_type(ctx, span);
        let a_val = self.eval_ctx(ctx, &a);
        ctx.bind("x".into(), a_val.clone(), false);
        let (b, lb) = self.fresh_type(ctx, span);
        let bl = self.level_term(ctx, &lb, 0);
        ctx.pop();
        Rc::new(Value::Sigma("x".into(), a_val, Some(la), Closure { env: ctx.env.clone(), body: b }, Some(Closure { env: ctx.env.clone(), body: bl })))
    }

    fn expl_args<'e>(args: &[(&'e Expr, Icit)], n: usize) -> Option<Vec<&'e Expr>> {
        if args.len() >= n && args[..n].iter().all(|(_, i)| *i == Icit::Expl) {
            Some(args[..n].iter().map(|(a, _)| *a).collect())
        } else {
            None
        }
    }

    fn infer_builtin(&mut self, ctx: &mut Ctx, x: &str, span: Span, args: &[(&Expr, Icit)]) -> EResult<(Tm, Val)> {
        let (t, ty, used) = match (x, Self::expl_args(args, 1), Self::expl_args(args, 2), Self::expl_args(args, 3)) {
            ("Set", None, _, _) if args.is_empty() => (sort(tm(Term::LZero)), Value::sort(LevelNF::constant(1)), 0),
            ("Set", Some(a), _, _) => {
                let l = self.check(ctx, a[0], &Rc::new(Value::Level))?;
                let lv = self.eval_ctx(ctx, &l);
                let nf = self.ev().level_nf(&lv).suc();
                (sort(l), Value::sort(nf), 1)
            }
            ("List", Some(a), _, _) => {
                let (at, la) = self.check_type(ctx, a[0])?;
                let SortLv::Lv(la) = la else { return self.fail(a[0].span(), "List of a type in the limit sort".into()) };
                (tm(Term::List(at)), Value::sort(self.ev().level_nf(&la)), 1)
            }
            ("Id", _, _, Some(a)) => {
                let (at, la) = self.check_type(ctx, a[0])?;
                let SortLv::Lv(la) = la else { return self.fail(a[0].span(), "equality on a type in the limit sort".into()) };
                let a_val = self.eval_ctx(ctx, &at);
                let lhs = self.check(ctx, a[1], &a_val)?;
                let rhs = self.check(ctx, a[2], &a_val)?;
                (tm(Term::Id(at, lhs, rhs)), Value::sort(self.ev().level_nf(&la)), 3)
            }
            ("Lift", _, Some(a), _) => {
                let l = self.check(ctx, a[0], &Rc::new(Value::Level))?;
                let (at, la) = self.check_type(ctx, a[1])?;
                let SortLv::Lv(la) = la else { return self.fail(a[1].span(), "Lift of a type in the limit sort".into()) };
                let ev = self.ev();
                let nf = ev.level_nf(&ev.eval(&ctx.env, &l)).max(&ev.level_nf(&la));
                (tm(Term::Lift(l, at)), Value::sort(nf), 2)
            }
            ("absurd", _, Some(a), _) => {
                let (at, _) = self.check_type(ctx, a[0])?;
                let e = self.check(ctx, a[1], &Rc::new(Value::Empty))?;
                let ty = self.eval_ctx(ctx, &at);
                (tm(Term::Absurd(at, e)), ty, 2)
            }
            ("fst" | "snd", Some(a), _, _) => {
                let (p, p_ty) = self.infer(ctx, a[0])?;
                let (p, p_ty) = self.insert_implicits(ctx, p, p_ty, a[0].span());
                let p_ty = match &*p_ty {
                    Value::Sigma(..) => p_ty,
                    Value::Neutral(..) => {
                        let s = self.fresh_sigma(ctx, a[0].span());
                        self.unify_at(ctx, &p_ty, &s, a[0].span())?;
                        s
                    }
                    _ => return self.fail(a[0].span(), format!("expected a pair, found a term of type {}", self.show(ctx, &p_ty))),
                };
                let Value::Sigma(_, fst_ty, _, snd_ty, _) = &*p_ty else { unreachable!() };
                if x == "fst" {
                    (tm(Term::Fst(p)), fst_ty.clone(), 1)
                } else {
                    let fst = self.eval_ctx(ctx, &tm(Term::Fst(p.clone())));
                    (tm(Term::Snd(p)), self.ev().apply_closure(snd_ty, fst), 1)
                }
            }
            ("lower", Some(a), _, _) => {
                let (p, p_ty) = self.infer(ctx, a[0])?;
                let (p, p_ty) = self.insert_implicits(ctx, p, p_ty, a[0].span());
                let inner = match &*p_ty {
                    Value::Lift(_, inner) => inner.clone(),
                    Value::Neutral(..) => {
                        let l = self.fresh_meta(ctx, &Rc::new(Value::Level), span, MetaReason::Level);
                        let (a_ty, _) = self.fresh_type(ctx, span);
                        let (l, a_ty) = (self.eval_ctx(ctx, &l), self.eval_ctx(ctx, &a_ty));
                        let lifted = Rc::new(Value::Lift(l, a_ty.clone()));
                        self.unify_at(ctx, &p_ty, &lifted, a[0].span())?;
                        a_ty
                    }
                    _ => return self.fail(a[0].span(), format!("expected a lifted value, found a term of type {}", self.show(ctx, &p_ty))),
                };
                (tm(Term::Lower(p)), inner, 1)
            }
            ("J", _, _, Some(a)) => {
                let (t, ty) = self.infer_j(ctx, span, a[0], a[1], a[2])?;
                (t, ty, 3)
            }
            ("J" | "Set", _, _, _) => return self.fail(span, format!("`{x}` must be applied to its explicit arguments")),
            _ => return self.infer_builtin_generic(ctx, x, span, args),
        };
        self.apply_args(ctx, t, ty, &args[used..], span)
    }

    fn infer_j(&mut self, ctx: &mut Ctx, span: Span, p: &Expr, pr: &Expr, eq: &Expr) -> EResult<(Tm, Val)> {
        let (eqt, eq_ty) = self.infer(ctx, eq)?;
        let eq_ty = self.ev().force(&eq_ty);
        let (a, x, y) = match &*eq_ty {
            Value::Id(a, x, y) => (a.clone(), x.clone(), y.clone()),
            Value::Neutral(..) => {
                let (a, _) = self.fresh_type(ctx, span);
                let a = self.eval_ctx(ctx, &a);
                let x = self.fresh_meta(ctx, &a, span, MetaReason::Implicit);
                let y = self.fresh_meta(ctx, &a, span, MetaReason::Implicit);
                let (x, y) = (self.eval_ctx(ctx, &x), self.eval_ctx(ctx, &y));
                let id = Rc::new(Value::Id(a.clone(), x.clone(), y.clone()));
                self.unify_at(ctx, &eq_ty, &id, eq.span())?;
                (a, x, y)
            }
            _ => return self.fail(eq.span(), format!("expected an equality, found a term of type {}", self.show(ctx, &eq_ty))),
        };
        let d = ctx.depth();
        let l = self.fresh_meta(ctx, &Rc::new(Value::Level), span, MetaReason::Level);
        let ev = self.ev();
        let motive_ty = pi(
            "y",
            Icit::Expl,
            ev.quote(d, &a),
            pi("e", Icit::Expl, tm(Term::Id(ev.quote(d + 1, &a), ev.quote(d + 1, &x), v(0))), sort(shift(&l, 2))),
        );
        let motive_ty = self.eval_ctx(ctx, &motive_ty);
        let pt = self.check(ctx, p, &motive_ty)?;
        let p_val = self.eval_ctx(ctx, &pt);
        let ev = self.ev();
        let refl_case = ev.apply(ev.apply(p_val.clone(), x, Icit::Expl), Rc::new(Value::Refl), Icit::Expl);
        let prt = self.check(ctx, pr, &refl_case)?;
        let eq_val = self.eval_ctx(ctx, &eqt);
        let ev = self.ev();
        let ty = ev.apply(ev.apply(p_val, y, Icit::Expl), eq_val, Icit::Expl);
        Ok((tm(Term::J(pt, prt, eqt)), ty))
    }

    /// A builtin used through its signature, η-expanded when partial.
    fn infer_builtin_generic(&mut self, ctx: &mut Ctx, x: &str, span: Span, args: &[(&Expr, Icit)]) -> EResult<(Tm, Val)> {
        let Some((sig, positions)) = builtin_sig(x) else {
            return self.fail(span, format!("`{x}` cannot be used here"));
        };
        let mut ty = self.ev().eval(&Vec::new(), &sig);
        let mut collected: Vec<Tm> = Vec::new();
        let mut k = 0;
        while collected.len() < positions {
            let forced = self.ev().force(&ty);
            let Value::Pi(_, pi_icit, dom, _, cod, _) = &*forced else { unreachable!("builtin signatures are Pis") };
            let (dom, cod) = (dom.clone(), cod.clone());
            let t = match args.get(k) {
                Some((a, i)) if i == pi_icit => {
                    k += 1;
                    self.check(ctx, a, &dom)?
                }
                Some((a, Icit::Impl)) => return self.fail(a.span(), "unexpected implicit argument".into()),
                _ if *pi_icit == Icit::Impl => self.fresh_meta(ctx, &dom, span, MetaReason::Implicit),
                _ => break,
            };
            let tv = self.eval_ctx(ctx, &t);
            collected.push(t);
            ty = self.ev().apply_closure(&cod, tv);
        }
        let remaining = positions - collected.len();
        let t = if remaining == 0 {
            build_builtin(x, &collected)
        } else {
            let mut all: Vec<Tm> = collected.iter().map(|t| shift(t, remaining)).collect();
            all.extend((0..remaining).map(|j| v(remaining - 1 - j)));
            let body = build_builtin(x, &all);
            // Binder names come from the signature, marked as generated.
            let mut names = Vec::new();
            let mut sig_ty = ty.clone();
            for j in 0..remaining {
                let forced = self.ev().force(&sig_ty);
                let Value::Pi(n, i, _, _, cod, _) = &*forced else { unreachable!() };
                names.push((Name::from(format!("#{n}")), *i));
                sig_ty = self.ev().apply_closure(cod, Value::var(Lvl(ctx.depth() + j)));
            }
            names.into_iter().rev().fold(body, |b, (n, i)| tm(Term::Lam(n, i, b)))
        };
        self.apply_args(ctx, t, ty, &args[k..], span)
    }

    /// Elaborates a clause pattern against `ty`, binding its variables.
    pub fn check_pattern(&mut self, ctx: &mut Ctx, p: &SPattern, ty: &Val) -> EResult<(Pattern, Val)> {
        let forced = self.ev().force(ty);
        let mismatch = |tc: &Tc, ctx: &Ctx| {
            err(p.span(), format!("pattern {p} does not fit type {}", tc.show(ctx, &forced)))
        };
        match p {
            SPattern::Var(x, _) => {
                let var = ctx.bind(x.clone(), ty.clone(), true);
                Ok((Pattern::Var(x.clone()), var))
            }
            SPattern::Num(n, _) => {
                if !matches!(*forced, Value::Nat) {
                    return mismatch(self, ctx);
                }
                let pat = (0..*n).fold(Pattern::Ctor(Ctor::Zero, Vec::new()), |p, _| Pattern::Ctor(Ctor::Suc, vec![p]));
                Ok((pat, Value::numeral(*n)))
            }
            SPattern::Ctor(c, ps, _) => match (&**c, &*forced) {
                ("zero", Value::Nat) => Ok((Pattern::Ctor(Ctor::Zero, Vec::new()), Rc::new(Value::Zero))),
                ("suc", Value::Nat) => {
                    let (q, qv) = self.check_pattern(ctx, &ps[0], &forced)?;
                    Ok((Pattern::Ctor(Ctor::Suc, vec![q]), Rc::new(Value::Suc(qv))))
                }
                ("nil", Value::List(_)) => Ok((Pattern::Ctor(Ctor::Nil, Vec::new()), Rc::new(Value::Nil))),
                ("cons", Value::List(a)) => {
                    let a = a.clone();
                    let (h, hv) = self.check_pattern(ctx, &ps[0], &a)?;
                    let (t, tv) = self.check_pattern(ctx, &ps[1], &forced)?;
                    Ok((Pattern::Ctor(Ctor::Cons, vec![h, t]), Rc::new(Value::Cons(hv, tv))))
                }
                _ => mismatch(self, ctx),
            },
        }
    }

    /// Elaborates one clause of a definition with signature `sig`. Implicit
    /// positions without a `{p}` pattern are bound by hidden variables.
    pub fn check_clause(&mut self, sig: &Val, pats: &[(SPattern, Icit)], rhs: &Expr, span: Span) -> EResult<(Vec<Pattern>, Tm, usize)> {
        let mut ctx = Ctx::default();
        let mut ty = sig.clone();
        let mut patterns = Vec::new();
        let mut k = 0;
        while k < pats.len() {
            let forced = self.ev().force(&ty);
            let Value::Pi(x, icit, dom, _, cod, _) = &*forced else {
                return err(pats[k].0.span(), "too many patterns for the signature");
            };
            let (dom, cod) = (dom.clone(), cod.clone());
            let (pat, val) = match (icit, pats[k].1) {
                (Icit::Impl, Icit::Expl) => {
                    let var = ctx.bind(x.clone(), dom, false);
                    (Pattern::Var(x.clone()), var)
                }
                (i, j) if *i == j => {
                    k += 1;
                    self.check_pattern(&mut ctx, &pats[k - 1].0, &dom)?
                }
                _ => return err(pats[k].0.span(), "implicit pattern where the signature expects an explicit argument"),
            };
            patterns.push(pat);
            ty = self.ev().apply_closure(&cod, val);
        }
        let _ = span;
        let t = self.check(&mut ctx, rhs, &ty)?;
        Ok((patterns, t, ctx.depth()))
    }
}
