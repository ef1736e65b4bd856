//! A checker for core terms. Equations between types go through [`Equate`],
//! so the same rules serve meta solving (where equations may teach the
//! unifier something) and validation (plain conversion).

use std::rc::Rc;

use crate::conv::conv;
use crate::eval::Ev;
use crate::level::LevelNF;
use crate::syntax::{Icit, Lvl, Name, Term, Tm};
use crate::tc::Tc;
use crate::value::{Env, LevelVal, Val, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum TcError {
    /// An introduction form met a type that is not yet known.
    CannotInfer,
    Mismatch(String),
}

pub type TcResult<T> = Result<T, TcError>;

pub trait Equate {
    fn ev(&self) -> Ev<'_>;
    fn equate(&mut self, names: &[Name], a: &Val, b: &Val) -> Result<(), String>;
}

impl Equate for Tc {
    fn ev(&self) -> Ev<'_> {
        Tc::ev(self)
    }

    fn equate(&mut self, names: &[Name], a: &Val, b: &Val) -> Result<(), String> {
        match self.sub(names, a, b) {
            Ok(()) => Ok(()),
            Err(crate::unify::UErr::Fail(msg)) => Err(msg),
            Err(crate::unify::UErr::Stuck(_)) => unreachable!("sub postpones stuck problems"),
        }
    }
}

/// Checks by conversion only; nothing gets solved.
pub struct Strict<'a>(pub Ev<'a>);

impl Equate for Strict<'_> {
    fn ev(&self) -> Ev<'_> {
        self.0
    }

    fn equate(&mut self, names: &[Name], a: &Val, b: &Val) -> Result<(), String> {
        if conv(&self.0, names.len(), a, b) {
            Ok(())
        } else {
            let show = |v: &Val| crate::pretty::show_val(&self.0, names, v);
            Err(format!("{} is not {}", show(a), show(b)))
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoreCtx {
    pub names: Vec<Name>,
    pub types: Vec<Val>,
    pub env: Env,
}

impl CoreCtx {
    pub fn depth(&self) -> usize {
        self.env.len()
    }

    fn bind(&mut self, x: Name, ty: Val) -> Val {
        let v = Value::var(Lvl(self.depth()));
        self.names.push(x);
        self.types.push(ty);
        self.env.push(v.clone());
        v
    }

    fn define(&mut self, x: Name, ty: Val, v: Val) {
        self.names.push(x);
        self.types.push(ty);
        self.env.push(v);
    }

    fn pop(&mut self) {
        self.names.pop();
        self.types.pop();
        self.env.pop();
    }
}

/// The universe a type lives in.
#[derive(Clone, Debug)]
pub enum SortOf {
    Level(LevelVal),
    Omega,
}

fn mismatch<E: Equate>(e: &E, ctx: &CoreCtx, what: &str, v: &Val) -> TcError {
    TcError::Mismatch(format!("expected {what}, found {}", crate::pretty::show_val(&e.ev(), &ctx.names, v)))
}

fn equate<E: Equate>(e: &mut E, ctx: &CoreCtx, a: &Val, b: &Val) -> TcResult<()> {
    e.equate(&ctx.names, a, b).map_err(TcError::Mismatch)
}

fn is_flex(v: &Value) -> bool {
    matches!(v, Value::Neutral(..))
}

pub fn check<E: Equate>(e: &mut E, ctx: &mut CoreCtx, t: &Tm, ty: &Val) -> TcResult<()> {
    let ty = e.ev().force(ty);
    match (&**t, &*ty) {
        (Term::Lam(x, i, b), Value::Pi(_, j, a, _, c, _)) if i == j => {
            let cod = c.clone();
            let v = ctx.bind(x.clone(), a.clone());
            let cod = e.ev().apply_closure(&cod, v);
            let r = check(e, ctx, b, &cod);
            ctx.pop();
            r
        }
        (Term::Pair(a, b), Value::Sigma(_, fst_ty, _, snd_ty, _)) => {
            let snd_ty = snd_ty.clone();
            check(e, ctx, a, fst_ty)?;
            let av = e.ev().eval(&ctx.env, a);
            let snd_ty = e.ev().apply_closure(&snd_ty, av);
            check(e, ctx, b, &snd_ty)
        }
        (Term::Tt, Value::Unit) | (Term::Nil, Value::List(_)) | (Term::Zero, Value::Nat) => Ok(()),
        (Term::Suc(n), Value::Nat) => check(e, ctx, n, &ty),
        (Term::Cons(x, xs), Value::List(a)) => {
            check(e, ctx, x, a)?;
            check(e, ctx, xs, &ty)
        }
        (Term::Refl, Value::Id(_, x, y)) => equate(e, ctx, x, y),
        (Term::LiftIntro(a), Value::Lift(_, a_ty)) => check(e, ctx, a, a_ty),
        (Term::Let(x, a, t, u), _) => {
            sort_of(e, ctx, a)?;
            let a_val = e.ev().eval(&ctx.env, a);
            check(e, ctx, t, &a_val)?;
            let t_val = e.ev().eval(&ctx.env, t);
            ctx.define(x.clone(), a_val, t_val);
            let r = check(e, ctx, u, &ty);
            ctx.pop();
            r
        }
        (Term::Lam(..) | Term::Pair(..) | Term::Tt | Term::Nil | Term::Refl | Term::LiftIntro(_), v) => {
            if is_flex(v) {
                Err(TcError::CannotInfer)
            } else {
                Err(mismatch(e, ctx, "a type matching an introduction form", &ty))
            }
        }
        _ => {
            let inferred = infer(e, ctx, t)?;
            let inferred = e.ev().force(&inferred);
            match (&*inferred, &*ty) {
                (Value::Sort(_) | Value::SortOmega, Value::SortOmega) => Ok(()),
                _ => equate(e, ctx, &inferred, &ty),
            }
        }
    }
}

/// The sort of a type `t`.
pub fn sort_of<E: Equate>(e: &mut E, ctx: &mut CoreCtx, t: &Tm) -> TcResult<SortOf> {
    let s = infer(e, ctx, t)?;
    match &*e.ev().force(&s) {
        Value::Sort(l) => Ok(SortOf::Level(l.clone())),
        Value::SortOmega => Ok(SortOf::Omega),
        v if is_flex(v) => Err(TcError::CannotInfer),
        _ => Err(mismatch(e, ctx, "a type", &s)),
    }
}

fn check_level<E: Equate>(e: &mut E, ctx: &mut CoreCtx, l: &Tm) -> TcResult<()> {
    check(e, ctx, l, &Rc::new(Value::Level))
}

fn set0() -> Val {
    Value::sort(LevelNF::zero())
}

/// Sort of a binder type whose second component lives under a new variable.
#[allow(clippy::too_many_arguments)]
fn binder_sort<E: Equate>(
    e: &mut E,
    ctx: &mut CoreCtx,
    x: &Name,
    a: &Tm,
    al: &Option<Tm>,
    b: &Tm,
    bl: &Option<Tm>,
) -> TcResult<Val> {
    let sa = sort_of(e, ctx, a)?;
    if let (Some(al), SortOf::Level(la)) = (al, &sa) {
        check_level(e, ctx, al)?;
        let alv = e.ev().eval(&ctx.env, al);
        equate(e, ctx, &alv, &Value::level(la.clone()))?;
    }
    let a_val = e.ev().eval(&ctx.env, a);
    ctx.bind(x.clone(), a_val);
    let sb = sort_of(e, ctx, b);
    let r = (|| {
        let sb = sb?;
        if let (Some(bl), SortOf::Level(lb)) = (bl, &sb) {
            check_level(e, ctx, bl)?;
            let blv = e.ev().eval(&ctx.env, bl);
            equate(e, ctx, &blv, &Value::level(lb.clone()))?;
        }
        Ok(sb)
    })();
    let depth = ctx.depth();
    ctx.pop();
    let sb = r?;
    Ok(match (sa, sb) {
        (SortOf::Level(la), SortOf::Level(lb)) => {
            let ev = e.ev();
            let lb_term = ev.quote_level(depth, &lb);
            if lb_term.mentions_var(0) {
                Rc::new(Value::SortOmega)
            } else {
                let lb = ev.level_nf(&ev.eval(&ctx.env, &shift_down(&lb_term)));
                Value::sort(la.max(&lb))
            }
        }
        _ => Rc::new(Value::SortOmega),
    })
}

/// Drops the innermost binder from a term that does not mention it.
fn shift_down(t: &Tm) -> Tm {
    fn go(t: &Term, cutoff: usize) -> Tm {
        match t {
            Term::Var(crate::syntax::Ix(i)) if *i > cutoff => Rc::new(Term::Var(crate::syntax::Ix(i - 1))),
            _ => Rc::new(crate::syntax::map_children(t, |c, under| go(c, cutoff + under))),
        }
    }
    go(t, 0)
}

pub fn infer<E: Equate>(e: &mut E, ctx: &mut CoreCtx, t: &Tm) -> TcResult<Val> {
    use Term::*;
    match &**t {
        Var(ix) => Ok(ctx.types[ctx.depth() - 1 - ix.0].clone()),
        Global(g) => Ok(e.ev().globals.get(*g).ty_val.clone()),
        Meta(m) => Ok(e.ev().metas.get(*m).ty_val.clone()),
        App(f, a, i) => {
            let fty = infer(e, ctx, f)?;
            let fty = e.ev().force(&fty);
            match &*fty {
                Value::Pi(_, j, dom, _, cod, _) if i == j => {
                    let cod = cod.clone();
                    check(e, ctx, a, dom)?;
                    let av = e.ev().eval(&ctx.env, a);
                    Ok(e.ev().apply_closure(&cod, av))
                }
                v if is_flex(v) => Err(TcError::CannotInfer),
                _ => Err(mismatch(e, ctx, "a function type", &fty)),
            }
        }
        Pi(x, _, a, al, b, bl) | Sigma(x, a, al, b, bl) => binder_sort(e, ctx, x, a, al, b, bl),
        Fst(p) | Snd(p) if matches!(&**p, Pair(..)) => {
            // A projected pair literal, as left behind by zonking: the pair
            // has the non-dependent type of its components.
            let Pair(a, b) = &**p else { unreachable!() };
            let (ta, tb) = (infer(e, ctx, a)?, infer(e, ctx, b)?);
            Ok(if matches!(&**t, Fst(_)) { ta } else { tb })
        }
        Fst(p) | Snd(p) => {
            let pty = infer(e, ctx, p)?;
            let pty = e.ev().force(&pty);
            match &*pty {
                Value::Sigma(_, a, _, b, _) => {
                    if matches!(&**t, Fst(_)) {
                        Ok(a.clone())
                    } else {
                        let ev = e.ev();
                        let fst = ev.eval(&ctx.env, &Rc::new(Fst(p.clone())));
                        Ok(ev.apply_closure(b, fst))
                    }
                }
                v if is_flex(v) => Err(TcError::CannotInfer),
                _ => Err(mismatch(e, ctx, "a pair type", &pty)),
            }
        }
        Unit | Empty | Nat | Level => Ok(set0()),
        Tt => Ok(Rc::new(Value::Unit)),
        Zero => Ok(Rc::new(Value::Nat)),
        Suc(n) => {
            check(e, ctx, n, &Rc::new(Value::Nat))?;
            Ok(Rc::new(Value::Nat))
        }
        Absurd(m, p) => {
            check(e, ctx, p, &Rc::new(Value::Empty))?;
            sort_of(e, ctx, m)?;
            Ok(e.ev().eval(&ctx.env, m))
        }
        List(a) => match sort_of(e, ctx, a)? {
            SortOf::Level(l) => Ok(Value::sort(l)),
            SortOf::Omega => Err(TcError::Mismatch("List of a type in the limit sort".into())),
        },
        Cons(x, xs) => {
            let a = infer(e, ctx, x)?;
            let list = Rc::new(Value::List(a));
            check(e, ctx, xs, &list)?;
            Ok(list)
        }
        Id(a, x, y) => {
            let s = sort_of(e, ctx, a)?;
            let a_val = e.ev().eval(&ctx.env, a);
            check(e, ctx, x, &a_val)?;
            check(e, ctx, y, &a_val)?;
            match s {
                SortOf::Level(l) => Ok(Value::sort(l)),
                SortOf::Omega => Err(TcError::Mismatch("equality on a type in the limit sort".into())),
            }
        }
        J(p, pr, eq) => {
            let eq_ty = infer(e, ctx, eq)?;
            let eq_ty = e.ev().force(&eq_ty);
            let Value::Id(a, x, _) = &*eq_ty else {
                return if is_flex(&eq_ty) { Err(TcError::CannotInfer) } else { Err(mismatch(e, ctx, "an equality", &eq_ty)) };
            };
            let (a, x) = (a.clone(), x.clone());
            // The motive must map every endpoint and proof to a type.
            let p_val = e.ev().eval(&ctx.env, p);
            let y = ctx.bind("y".into(), a.clone());
            let id_ty = Rc::new(Value::Id(a, x.clone(), y.clone()));
            let q = ctx.bind("q".into(), id_ty);
            let ev = e.ev();
            let body = ev.apply(ev.apply(p_val.clone(), y, Icit::Expl), q, Icit::Expl);
            let body = ev.quote(ctx.depth(), &body);
            let r = sort_of(e, ctx, &body);
            ctx.pop();
            ctx.pop();
            r?;
            let ev = e.ev();
            let refl_case = ev.apply(ev.apply(p_val.clone(), x, Icit::Expl), Rc::new(Value::Refl), Icit::Expl);
            check(e, ctx, pr, &refl_case)?;
            let ev = e.ev();
            let Value::Id(_, _, y) = &*eq_ty else { unreachable!() };
            let eq_val = ev.eval(&ctx.env, eq);
            Ok(ev.apply(ev.apply(p_val, y.clone(), Icit::Expl), eq_val, Icit::Expl))
        }
        Lift(l, a) => {
            check_level(e, ctx, l)?;
            match sort_of(e, ctx, a)? {
                SortOf::Level(la) => {
                    let ev = e.ev();
                    Ok(Value::sort(ev.level_nf(&ev.eval(&ctx.env, l)).max(&la)))
                }
                SortOf::Omega => Err(TcError::Mismatch("Lift of a type in the limit sort".into())),
            }
        }
        Lower(a) => {
            let aty = infer(e, ctx, a)?;
            let aty = e.ev().force(&aty);
            match &*aty {
                Value::Lift(_, inner) => Ok(inner.clone()),
                v if is_flex(v) => Err(TcError::CannotInfer),
                _ => Err(mismatch(e, ctx, "a lifted type", &aty)),
            }
        }
        Sort(l) => {
            check_level(e, ctx, l)?;
            let ev = e.ev();
            Ok(Value::sort(ev.level_nf(&ev.eval(&ctx.env, l)).suc()))
        }
        LZero => Ok(Rc::new(Value::Level)),
        LSuc(l) => {
            check_level(e, ctx, l)?;
            Ok(Rc::new(Value::Level))
        }
        LMax(a, b) => {
            check_level(e, ctx, a)?;
            check_level(e, ctx, b)?;
            Ok(Rc::new(Value::Level))
        }
        Let(x, a, d, u) => {
            sort_of(e, ctx, a)?;
            let a_val = e.ev().eval(&ctx.env, a);
            check(e, ctx, d, &a_val)?;
            let d_val = e.ev().eval(&ctx.env, d);
            ctx.define(x.clone(), a_val, d_val);
            let r = infer(e, ctx, u);
            ctx.pop();
            r
        }
        Lam(..) | Pair(..) | Nil | Refl | LiftIntro(_) => Err(TcError::CannotInfer),
    }
}
