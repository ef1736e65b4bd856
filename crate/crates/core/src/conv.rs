//! Definitional equality on values, with η for functions, pairs, lifts and
//! the unit type. It never solves anything: unsolved metas are opaque heads.

use crate::eval::Ev;
use crate::syntax::Lvl;
use crate::value::{Closure, Elim, Head, Val, Value};

pub fn conv(ev: &Ev<'_>, depth: usize, l: &Val, r: &Val) -> bool {
    use Value::*;
    let (l, r) = (ev.force(l), ev.force(r));
    if matches!(*l, Lvl(_)) || matches!(*r, Lvl(_)) {
        return ev.level_key(depth, &l) == ev.level_key(depth, &r);
    }
    let fresh = Value::var(crate::syntax::Lvl(depth));
    let under = |c: &Closure, d: &Closure| {
        conv(ev, depth + 1, &ev.apply_closure(c, fresh.clone()), &ev.apply_closure(d, fresh.clone()))
    };
    let opt = |a: &Option<Val>, b: &Option<Val>| match (a, b) {
        (Some(a), Some(b)) => conv(ev, depth, a, b),
        _ => true,
    };
    let opt_under = |a: &Option<Closure>, b: &Option<Closure>| match (a, b) {
        (Some(a), Some(b)) => under(a, b),
        _ => true,
    };
    match (&*l, &*r) {
        (Lam(_, _, c), Lam(_, _, d)) => under(c, d),
        (Lam(_, i, c), Neutral(..)) => conv(ev, depth + 1, &ev.apply_closure(c, fresh.clone()), &ev.apply(r.clone(), fresh.clone(), *i)),
        (Neutral(..), Lam(_, i, d)) => conv(ev, depth + 1, &ev.apply(l.clone(), fresh.clone(), *i), &ev.apply_closure(d, fresh.clone())),
        (Tt, _) | (_, Tt) => true,
        (Pair(a, b), Pair(c, d)) => conv(ev, depth, a, c) && conv(ev, depth, b, d),
        (Pair(a, b), Neutral(..)) => {
            conv(ev, depth, a, &ev.elim(r.clone(), Elim::Fst)) && conv(ev, depth, b, &ev.elim(r.clone(), Elim::Snd))
        }
        (Neutral(..), Pair(a, b)) => {
            conv(ev, depth, &ev.elim(l.clone(), Elim::Fst), a) && conv(ev, depth, &ev.elim(l.clone(), Elim::Snd), b)
        }
        (LiftIntro(a), LiftIntro(b)) => conv(ev, depth, a, b),
        (LiftIntro(a), Neutral(..)) => conv(ev, depth, a, &ev.elim(r.clone(), Elim::Lower)),
        (Neutral(..), LiftIntro(b)) => conv(ev, depth, &ev.elim(l.clone(), Elim::Lower), b),
        (Pi(_, i, a, al, b, bl), Pi(_, j, c, cl, d, dl)) => {
            i == j && conv(ev, depth, a, c) && opt(al, cl) && under(b, d) && opt_under(bl, dl)
        }
        (Sigma(_, a, al, b, bl), Sigma(_, c, cl, d, dl)) => {
            conv(ev, depth, a, c) && opt(al, cl) && under(b, d) && opt_under(bl, dl)
        }
        (Sort(a), Sort(b)) => {
            let key = |nf: &crate::value::LevelVal| nf.map_heads(|h| crate::eval::AtomKey(ev.quote(depth, h)));
            key(a) == key(b)
        }
        (SortOmega, SortOmega)
        | (Nat, Nat)
        | (Unit, Unit)
        | (Empty, Empty)
        | (Level, Level)
        | (Zero, Zero)
        | (Nil, Nil)
        | (Refl, Refl) => true,
        (Suc(a), Suc(b)) | (List(a), List(b)) => conv(ev, depth, a, b),
        (Cons(a, b), Cons(c, d)) | (Lift(a, b), Lift(c, d)) => conv(ev, depth, a, c) && conv(ev, depth, b, d),
        (Id(a, x, y), Id(b, x2, y2)) => conv(ev, depth, a, b) && conv(ev, depth, x, x2) && conv(ev, depth, y, y2),
        (Neutral(h, sp), Neutral(h2, sp2)) => same_head(*h, *h2) && spines(ev, depth, sp, sp2),
        _ => false,
    }
}

fn same_head(a: Head, b: Head) -> bool {
    match (a, b) {
        (Head::Var(Lvl(x)), Head::Var(Lvl(y))) => x == y,
        (Head::Meta(m), Head::Meta(n)) => m == n,
        (Head::Global(g), Head::Global(h)) => g == h,
        _ => false,
    }
}

fn spines(ev: &Ev<'_>, depth: usize, sp: &[Elim], sp2: &[Elim]) -> bool {
    sp.len() == sp2.len()
        && sp.iter().zip(sp2).all(|(a, b)| match (a, b) {
            (Elim::App(x, i), Elim::App(y, j)) => i == j && conv(ev, depth, x, y),
            (Elim::Fst, Elim::Fst) | (Elim::Snd, Elim::Snd) | (Elim::Lower, Elim::Lower) => true,
            (Elim::J(p, pr), Elim::J(q, qr)) => conv(ev, depth, p, q) && conv(ev, depth, pr, qr),
            (Elim::Absurd(m), Elim::Absurd(n)) => conv(ev, depth, m, n),
            _ => false,
        })
}
