//! Printing core terms by translating them back to surface syntax.

use std::rc::Rc;

use crate::eval::{Ev, Globals};
use crate::surface::Expr;
use crate::syntax::{Icit, Name, Span, Term};
use crate::value::Val;

/// Names the printer must not reuse for local variables.
const RESERVED: [&str; 26] = [
    "Set", "Level", "lzero", "lsuc", "lmax", "Nat", "zero", "suc", "List", "nil", "cons", "Unit", "tt", "Empty",
    "absurd", "Id", "refl", "J", "Lift", "lift", "lower", "fst", "snd", "let", "in", "postulate",
];

struct Delab<'a> {
    globals: &'a Globals,
}

impl Delab<'_> {
    fn taken(&self, names: &[Name], x: &str) -> bool {
        RESERVED.contains(&x) || self.globals.lookup(x).is_some() || names.iter().any(|n| &**n == x)
    }

    /// A printable name for a new binder, distinct from everything in scope.
    fn fresh(&self, names: &[Name], hint: &str, used: bool) -> Name {
        let base = hint.trim_start_matches('#');
        if !used && (base == "_" || base.is_empty()) {
            return "_".into();
        }
        let mut x: String = if base.is_empty() || base == "_" { "x".into() } else { base.into() };
        while self.taken(names, &x) {
            x.push('\'');
        }
        x.into()
    }

    fn go(&self, names: &mut Vec<Name>, t: &Term) -> Expr {
        let z = Span::default();
        let id = |x: &str| Expr::Ident(x.into(), z);
        let app1 = |f: &str, a: Expr| Expr::app(id(f), a, Icit::Expl);
        match t {
            Term::Var(ix) => Expr::Ident(names[names.len() - 1 - ix.0].clone(), z),
            Term::Global(g) => Expr::Ident(self.globals.get(*g).name.clone(), z),
            Term::Meta(m) => Expr::Ident(m.to_string().into(), z),
            Term::App(f, a, i) => Expr::app(self.go(names, f), self.go(names, a), *i),
            Term::Lam(x, i, b) => {
                let x = self.fresh(names, x, b.mentions_var(0));
                let b = self.under(names, &x, b);
                Expr::Lam(x, *i, Box::new(b))
            }
            Term::Pi(x, i, a, _, b, _) => {
                let a = self.go(names, a);
                let used = b.mentions_var(0) || *i == Icit::Impl;
                let x = self.fresh(names, x, used);
                let b = self.under(names, &x, b);
                Expr::Pi(x, *i, Box::new(a), Box::new(b))
            }
            Term::Sigma(x, a, _, b, _) => {
                let a = self.go(names, a);
                let x = self.fresh(names, x, b.mentions_var(0));
                let b = self.under(names, &x, b);
                Expr::Sigma(x, Box::new(a), Box::new(b))
            }
            Term::Pair(a, b) => Expr::Pair(Box::new(self.go(names, a)), Box::new(self.go(names, b))),
            Term::Fst(p) => app1("fst", self.go(names, p)),
            Term::Snd(p) => app1("snd", self.go(names, p)),
            Term::Unit => id("Unit"),
            Term::Tt => id("tt"),
            Term::Empty => id("Empty"),
            Term::Absurd(m, e) => Expr::app(app1("absurd", self.go(names, m)), self.go(names, e), Icit::Expl),
            Term::Nat => id("Nat"),
            Term::Zero => Expr::Num(0, z),
            Term::Suc(n) => match numeral(t) {
                Some(k) => Expr::Num(k, z),
                None => app1("suc", self.go(names, n)),
            },
            Term::List(a) => app1("List", self.go(names, a)),
            Term::Nil => id("nil"),
            Term::Cons(x, xs) => Expr::app(app1("cons", self.go(names, x)), self.go(names, xs), Icit::Expl),
            Term::Id(a, x, y) => {
                let e = app1("Id", self.go(names, a));
                let e = Expr::app(e, self.go(names, x), Icit::Expl);
                Expr::app(e, self.go(names, y), Icit::Expl)
            }
            Term::Refl => id("refl"),
            Term::J(p, pr, eq) => {
                let e = app1("J", self.go(names, p));
                let e = Expr::app(e, self.go(names, pr), Icit::Expl);
                Expr::app(e, self.go(names, eq), Icit::Expl)
            }
            Term::Lift(l, a) => Expr::app(app1("Lift", self.go(names, l)), self.go(names, a), Icit::Expl),
            Term::LiftIntro(a) => app1("lift", self.go(names, a)),
            Term::Lower(a) => app1("lower", self.go(names, a)),
            Term::Sort(l) if matches!(**l, Term::LZero) => id("Set"),
            Term::Sort(l) => app1("Set", self.go(names, l)),
            Term::Level => id("Level"),
            Term::LZero => id("lzero"),
            Term::LSuc(l) => app1("lsuc", self.go(names, l)),
            Term::LMax(a, b) => Expr::app(app1("lmax", self.go(names, a)), self.go(names, b), Icit::Expl),
            Term::Let(x, a, d, b) => {
                let a = self.go(names, a);
                let d = self.go(names, d);
                let x = self.fresh(names, x, true);
                let b = self.under(names, &x, b);
                Expr::Let(x, Some(Box::new(a)), Box::new(d), Box::new(b))
            }
        }
    }

    fn under(&self, names: &mut Vec<Name>, x: &Name, t: &Term) -> Expr {
        names.push(x.clone());
        let e = self.go(names, t);
        names.pop();
        e
    }
}

fn numeral(t: &Term) -> Option<u64> {
    match t {
        Term::Zero => Some(0),
        Term::Suc(n) => numeral(n).map(|k| k + 1),
        _ => None,
    }
}

/// Surface form of a core term whose free variables are named by `names`.
pub fn delab(globals: &Globals, names: &[Name], t: &Term) -> Expr {
    let d = Delab { globals };
    let mut scope: Vec<Name> = names.iter().map(display_name).collect();
    d.go(&mut scope, t)
}

fn display_name(n: &Name) -> Name {
    match n.strip_prefix('#') {
        Some(rest) => rest.into(),
        None => n.clone(),
    }
}

pub fn show_term(globals: &Globals, names: &[Name], t: &Term) -> String {
    delab(globals, names, t).to_string()
}

/// Prints a value by reading it back in a context named by `names`.
pub fn show_val(ev: &Ev<'_>, names: &[Name], v: &Val) -> String {
    match &*ev.force(v) {
        crate::value::Value::SortOmega => "SetOmega".into(),
        _ => show_term(ev.globals, names, &ev.quote(names.len(), v)),
    }
}

/// A level read back as a term, for reports.
pub fn show_level(ev: &Ev<'_>, names: &[Name], l: &crate::value::LevelVal) -> String {
    let t: Rc<Term> = ev.quote_level(names.len(), l);
    show_term(ev.globals, names, &t)
}
