//! Evaluation, forcing and read-back.

use std::collections::HashMap;
use std::rc::Rc;

use crate::level::{LevelHead, LevelNF};
use crate::meta::MetaCtx;
use crate::syntax::{map_children, ClauseDef, Ctor, GlobalId, Icit, Ix, Lvl, MetaId, Name, Pattern, Term, Tm};
use crate::value::{identity_env, Closure, Elim, Env, Head, LevelVal, Val, Value};

#[derive(Clone, Debug)]
pub enum GlobalDef {
    /// Signature checked, clauses not yet accepted; opaque meanwhile.
    Pending,
    Postulate,
    Clauses(Rc<ClauseDef>),
    /// The declaration was rejected; the name stays opaque.
    Failed,
}

#[derive(Clone, Debug)]
pub struct GlobalEntry {
    pub name: Name,
    pub ty: Tm,
    pub ty_val: Val,
    pub def: GlobalDef,
    pub line: u32,
}

#[derive(Clone, Debug, Default)]
pub struct Globals {
    entries: Vec<GlobalEntry>,
    by_name: HashMap<Name, GlobalId>,
}

impl Globals {
    pub fn add(&mut self, entry: GlobalEntry) -> GlobalId {
        let id = GlobalId(self.entries.len() as u32);
        if &*entry.name != "_" {
            self.by_name.insert(entry.name.clone(), id);
        }
        self.entries.push(entry);
        id
    }

    pub fn get(&self, g: GlobalId) -> &GlobalEntry {
        &self.entries[g.0 as usize]
    }

    pub fn get_mut(&mut self, g: GlobalId) -> &mut GlobalEntry {
        &mut self.entries[g.0 as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<GlobalId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clauses(&self, g: GlobalId) -> Option<&Rc<ClauseDef>> {
        match &self.get(g).def {
            GlobalDef::Clauses(d) => Some(d),
            _ => None,
        }
    }
}

/// A level atom compared by its read-back term, up to renaming of binders.
#[derive(Clone, Debug)]
pub struct AtomKey(pub Tm);

impl PartialEq for AtomKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.alpha_eq(&other.0)
    }
}

impl LevelHead for AtomKey {
    type Meta = MetaId;

    fn flex_meta(&self) -> Option<MetaId> {
        let mut t: &Term = &self.0;
        loop {
            match t {
                Term::Meta(m) => return Some(*m),
                Term::App(f, _, _) | Term::Fst(f) | Term::Snd(f) => t = f,
                _ => return None,
            }
        }
    }

    fn mentions_meta(&self, meta: MetaId) -> bool {
        self.0.mentions_meta(meta)
    }

    fn is_rigid(&self) -> bool {
        let mut ms = Default::default();
        self.0.metas(&mut ms);
        ms.is_empty()
    }
}

/// `lmax` of the given atoms, each under `offset` successors, and a constant.
pub fn build_level(atoms: Vec<(Tm, u32)>, constant: u32) -> Tm {
    let suc_n = |t: Tm, k: u32| (0..k).fold(t, |t, _| Rc::new(Term::LSuc(t)));
    let mut parts: Vec<Tm> = atoms.into_iter().map(|(t, k)| suc_n(t, k)).collect();
    if constant > 0 || parts.is_empty() {
        parts.push(suc_n(Rc::new(Term::LZero), constant));
    }
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one part");
    it.fold(first, |acc, p| Rc::new(Term::LMax(acc, p)))
}

/// The term form of a keyed level.
pub fn key_level_term(nf: &LevelNF<AtomKey>) -> Tm {
    build_level(nf.atoms().iter().map(|a| (a.head.0.clone(), a.offset)).collect(), nf.closed_constant())
}

pub enum MatchResult {
    Matched(usize, Env),
    Stuck,
    NoMatch,
}

/// Read access to everything evaluation depends on.
#[derive(Clone, Copy)]
pub struct Ev<'a> {
    pub globals: &'a Globals,
    pub metas: &'a MetaCtx,
}

impl<'a> Ev<'a> {
    pub fn new(globals: &'a Globals, metas: &'a MetaCtx) -> Self {
        Ev { globals, metas }
    }

    pub fn eval(&self, env: &Env, t: &Term) -> Val {
        use Term::*;
        let ev = |t: &Tm| self.eval(env, t);
        let clo = |t: &Tm| Closure { env: env.clone(), body: t.clone() };
        match t {
            Var(Ix(i)) => env[env.len() - 1 - i].clone(),
            Global(g) => self.global(*g),
            Meta(m) => match self.metas.solution_val(*m) {
                Some(v) => v.clone(),
                None => Value::meta(*m),
            },
            App(f, a, i) => self.apply(ev(f), ev(a), *i),
            Lam(x, i, b) => Rc::new(Value::Lam(x.clone(), *i, clo(b))),
            Pi(x, i, a, al, b, bl) => {
                Rc::new(Value::Pi(x.clone(), *i, ev(a), al.as_ref().map(ev), clo(b), bl.as_ref().map(clo)))
            }
            Sigma(x, a, al, b, bl) => {
                Rc::new(Value::Sigma(x.clone(), ev(a), al.as_ref().map(ev), clo(b), bl.as_ref().map(clo)))
            }
            Pair(a, b) => Rc::new(Value::Pair(ev(a), ev(b))),
            Fst(a) => self.elim(ev(a), Elim::Fst),
            Snd(a) => self.elim(ev(a), Elim::Snd),
            Unit => Rc::new(Value::Unit),
            Tt => Rc::new(Value::Tt),
            Empty => Rc::new(Value::Empty),
            Absurd(m, e) => self.elim(ev(e), Elim::Absurd(ev(m))),
            Nat => Rc::new(Value::Nat),
            Zero => Rc::new(Value::Zero),
            Suc(n) => Rc::new(Value::Suc(ev(n))),
            List(a) => Rc::new(Value::List(ev(a))),
            Nil => Rc::new(Value::Nil),
            Cons(x, xs) => Rc::new(Value::Cons(ev(x), ev(xs))),
            Id(a, x, y) => Rc::new(Value::Id(ev(a), ev(x), ev(y))),
            Refl => Rc::new(Value::Refl),
            J(p, pr, eq) => self.elim(ev(eq), Elim::J(ev(p), ev(pr))),
            Lift(l, a) => Rc::new(Value::Lift(ev(l), ev(a))),
            LiftIntro(a) => Rc::new(Value::LiftIntro(ev(a))),
            Lower(a) => self.elim(ev(a), Elim::Lower),
            Sort(l) => Value::sort(self.level_nf(&ev(l))),
            Level => Rc::new(Value::Level),
            LZero => Value::level(LevelNF::zero()),
            LSuc(l) => Value::level(self.level_nf(&ev(l)).suc()),
            LMax(a, b) => Value::level(self.level_nf(&ev(a)).max(&self.level_nf(&ev(b)))),
            Let(_, _, t, u) => {
                let mut env2 = env.clone();
                env2.push(ev(t));
                self.eval(&env2, u)
            }
        }
    }

    fn global(&self, g: GlobalId) -> Val {
        if let Some(def) = self.globals.clauses(g) {
            if def.arity == 0 {
                if let Some(c) = def.clauses.first() {
                    return self.eval(&Vec::new(), &c.rhs);
                }
            }
        }
        Rc::new(Value::Neutral(Head::Global(g), Vec::new()))
    }

    pub fn apply_closure(&self, c: &Closure, v: Val) -> Val {
        let mut env = c.env.clone();
        env.push(v);
        self.eval(&env, &c.body)
    }

    pub fn apply(&self, f: Val, a: Val, icit: Icit) -> Val {
        self.elim(f, Elim::App(a, icit))
    }

    pub fn apply_spine(&self, v: Val, spine: &[Elim]) -> Val {
        spine.iter().fold(v, |acc, e| self.elim(acc, e.clone()))
    }

    pub fn elim(&self, v: Val, e: Elim) -> Val {
        let v = match &*v {
            Value::Neutral(Head::Meta(_), _) => self.force(&v),
            _ => v,
        };
        match (&*v, e) {
            (Value::Lam(_, _, c), Elim::App(a, _)) => self.apply_closure(c, a),
            (Value::Pair(a, _), Elim::Fst) => a.clone(),
            (Value::Pair(_, b), Elim::Snd) => b.clone(),
            (Value::Refl, Elim::J(_, pr)) => pr,
            (Value::LiftIntro(a), Elim::Lower) => a.clone(),
            (Value::Neutral(h, sp), e) => {
                let mut sp = sp.clone();
                sp.push(e);
                if let Head::Global(g) = h {
                    if let Some(def) = self.globals.clauses(*g) {
                        if sp.len() == def.arity && sp.iter().all(|e| matches!(e, Elim::App(..))) {
                            if let Some(v) = self.unfold(def, &sp) {
                                return v;
                            }
                        }
                    }
                }
                Rc::new(Value::Neutral(*h, sp))
            }
            (v, e) => panic!("ill-typed elimination {e:?} of {v:?}"),
        }
    }

    fn unfold(&self, def: &ClauseDef, spine: &[Elim]) -> Option<Val> {
        let args: Vec<Val> = spine[..def.arity]
            .iter()
            .map(|e| match e {
                Elim::App(a, _) => a.clone(),
                _ => unreachable!("checked by caller"),
            })
            .collect();
        match self.match_clauses(def, &args) {
            MatchResult::Matched(i, env) => {
                let v = self.eval(&env, &def.clauses[i].rhs);
                Some(self.apply_spine(v, &spine[def.arity..]))
            }
            MatchResult::Stuck | MatchResult::NoMatch => None,
        }
    }

    /// Selects the clause matching `args`, or reports why none applies.
    pub fn match_clauses(&self, def: &ClauseDef, args: &[Val]) -> MatchResult {
        let mut stuck = false;
        for (i, c) in def.clauses.iter().enumerate() {
            let mut env = Vec::new();
            let mut outcome = Some(true);
            for (p, a) in c.patterns.iter().zip(args) {
                match self.match_pattern(p, a, &mut env) {
                    Some(true) => {}
                    other => {
                        outcome = other;
                        break;
                    }
                }
            }
            match outcome {
                Some(true) => return MatchResult::Matched(i, env),
                None => stuck = true,
                Some(false) => {}
            }
        }
        if stuck {
            MatchResult::Stuck
        } else {
            MatchResult::NoMatch
        }
    }

    /// `Some(true)` on a match, `Some(false)` on a constructor clash and
    /// `None` when the value is not yet constructor-headed.
    fn match_pattern(&self, p: &Pattern, v: &Val, env: &mut Env) -> Option<bool> {
        let (c, ps) = match p {
            Pattern::Var(_) => {
                env.push(v.clone());
                return Some(true);
            }
            Pattern::Ctor(c, ps) => (*c, ps),
        };
        let v = self.force(v);
        let args: Vec<Val> = match (&*v, c) {
            (Value::Zero, Ctor::Zero) | (Value::Nil, Ctor::Nil) => Vec::new(),
            (Value::Suc(n), Ctor::Suc) => vec![n.clone()],
            (Value::Cons(x, xs), Ctor::Cons) => vec![x.clone(), xs.clone()],
            (Value::Zero | Value::Suc(_) | Value::Nil | Value::Cons(..), _) => return Some(false),
            _ => return None,
        };
        for (p, a) in ps.iter().zip(&args) {
            match self.match_pattern(p, a, env) {
                Some(true) => {}
                other => return other,
            }
        }
        Some(true)
    }

    /// Unfolds solved metas and retries blocked definitions at the head.
    pub fn force(&self, v: &Val) -> Val {
        match &**v {
            Value::Neutral(Head::Meta(m), sp) => match self.metas.solution_val(*m) {
                Some(sol) => self.force(&self.apply_spine(sol.clone(), sp)),
                None => v.clone(),
            },
            Value::Neutral(Head::Global(g), sp) => match self.globals.clauses(*g) {
                Some(def) if sp.len() >= def.arity && sp[..def.arity].iter().all(|e| matches!(e, Elim::App(..))) => {
                    match self.unfold(def, sp) {
                        Some(u) => self.force(&u),
                        None => v.clone(),
                    }
                }
                Some(def) if def.arity == 0 => self.force(&self.apply_spine(self.global(*g), sp)),
                _ => v.clone(),
            },
            Value::Lvl(nf) => Value::level(self.force_level(nf)),
            Value::Sort(nf) => Value::sort(self.force_level(nf)),
            _ => v.clone(),
        }
    }

    fn force_level(&self, nf: &LevelVal) -> LevelVal {
        nf.substitute(|h| self.level_nf(h))
    }

    /// The canonical form of a level-valued value.
    pub fn level_nf(&self, v: &Val) -> LevelVal {
        let v = self.force(v);
        match &*v {
            Value::Lvl(nf) => nf.clone(),
            _ => LevelNF::atom(v),
        }
    }

    /// A level with atoms keyed by their read-back at `depth`.
    pub fn level_key(&self, depth: usize, v: &Val) -> LevelNF<AtomKey> {
        self.level_nf(v).map_heads(|h| AtomKey(self.quote(depth, h)))
    }

    pub fn quote_level(&self, depth: usize, nf: &LevelVal) -> Tm {
        build_level(nf.atoms().iter().map(|a| (self.quote(depth, &a.head), a.offset)).collect(), nf.closed_constant())
    }

    pub fn quote(&self, depth: usize, v: &Val) -> Tm {
        use Value::*;
        let v = self.force(v);
        let q = |v: &Val| self.quote(depth, v);
        let under = |c: &Closure| self.quote(depth + 1, &self.apply_closure(c, Value::var(crate::syntax::Lvl(depth))));
        Rc::new(match &*v {
            Neutral(h, sp) => return self.quote_neutral(depth, *h, sp),
            Lam(x, i, c) => Term::Lam(x.clone(), *i, under(c)),
            Pi(x, i, a, al, b, bl) => {
                Term::Pi(x.clone(), *i, q(a), al.as_ref().map(q), under(b), bl.as_ref().map(under))
            }
            Sigma(x, a, al, b, bl) => Term::Sigma(x.clone(), q(a), al.as_ref().map(q), under(b), bl.as_ref().map(under)),
            Pair(a, b) => Term::Pair(q(a), q(b)),
            Unit => Term::Unit,
            Tt => Term::Tt,
            Empty => Term::Empty,
            Nat => Term::Nat,
            Zero => Term::Zero,
            Suc(n) => Term::Suc(q(n)),
            List(a) => Term::List(q(a)),
            Nil => Term::Nil,
            Cons(x, xs) => Term::Cons(q(x), q(xs)),
            Id(a, x, y) => Term::Id(q(a), q(x), q(y)),
            Refl => Term::Refl,
            Lift(l, a) => Term::Lift(q(l), q(a)),
            LiftIntro(a) => Term::LiftIntro(q(a)),
            Sort(l) => Term::Sort(self.quote_level(depth, l)),
            SortOmega => panic!("the limit sort has no syntax"),
            Level => Term::Level,
            Lvl(l) => return self.quote_level(depth, l),
        })
    }

    fn quote_neutral(&self, depth: usize, h: Head, sp: &[Elim]) -> Tm {
        let head = Rc::new(match h {
            Head::Var(l) => Term::Var(l.to_ix(depth)),
            Head::Meta(m) => Term::Meta(m),
            Head::Global(g) => Term::Global(g),
        });
        sp.iter().fold(head, |t, e| {
            Rc::new(match e {
                Elim::App(a, i) => Term::App(t, self.quote(depth, a), *i),
                Elim::Fst => Term::Fst(t),
                Elim::Snd => Term::Snd(t),
                Elim::J(p, pr) => Term::J(self.quote(depth, p), self.quote(depth, pr), t),
                Elim::Absurd(m) => Term::Absurd(self.quote(depth, m), t),
                Elim::Lower => Term::Lower(t),
            })
        })
    }

    /// Normal form of `t` in an environment of `env.len()` variables.
    pub fn nf(&self, env: &Env, t: &Term) -> Tm {
        self.quote(env.len(), &self.eval(env, t))
    }

    /// Substitutes solved metas, leaving the rest of the term alone.
    pub fn zonk(&self, depth: usize, t: &Term) -> Tm {
        if let Term::Meta(m) = t.spine().0 {
            if self.metas.is_solved(*m) {
                return self.quote(depth, &self.eval(&identity_env(depth), t));
            }
        }
        Rc::new(map_children(t, |c, under| self.zonk(depth + under, c)))
    }

    /// Opens a closed Pi type over `n` fresh variables starting at level `depth`.
    pub fn open_pi(&self, ty: &Val, depth: usize, n: usize) -> Option<Val> {
        let mut ty = ty.clone();
        for k in 0..n {
            ty = match &*self.force(&ty) {
                Value::Pi(_, _, _, _, b, _) => self.apply_closure(b, Value::var(Lvl(depth + k))),
                _ => return None,
            };
        }
        Some(ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Clause, Term as T};

    fn tm(t: Term) -> Tm {
        Rc::new(t)
    }

    fn plus_globals() -> (Globals, GlobalId) {
        // plus zero n = n ; plus (suc m) n = suc (plus m n)
        let mut gs = Globals::default();
        let g = GlobalId(0);
        let rec = Term::app(Term::app(tm(T::Global(g)), tm(T::Var(Ix(1))), Icit::Expl), tm(T::Var(Ix(0))), Icit::Expl);
        let def = ClauseDef::new(
            "plus".into(),
            g,
            tm(T::Nat),
            vec![
                Clause {
                    patterns: vec![Pattern::Ctor(Ctor::Zero, vec![]), Pattern::Var("n".into())],
                    rhs: tm(T::Var(Ix(0))),
                    line: 0,
                },
                Clause {
                    patterns: vec![Pattern::Ctor(Ctor::Suc, vec![Pattern::Var("m".into())]), Pattern::Var("n".into())],
                    rhs: tm(T::Suc(rec)),
                    line: 0,
                },
            ],
        );
        gs.add(GlobalEntry {
            name: "plus".into(),
            ty: tm(T::Nat),
            ty_val: Rc::new(Value::Nat),
            def: GlobalDef::Clauses(Rc::new(def)),
            line: 0,
        });
        (gs, g)
    }

    #[test]
    fn plus_two_three() {
        let (gs, g) = plus_globals();
        let metas = MetaCtx::default();
        let ev = Ev::new(&gs, &metas);
        let t = Term::app(Term::app(tm(T::Global(g)), Term::numeral(2), Icit::Expl), Term::numeral(3), Icit::Expl);
        assert_eq!(ev.eval(&vec![], &t).as_numeral(), Some(5));
    }

    #[test]
    fn blocked_on_variable() {
        let (gs, g) = plus_globals();
        let metas = MetaCtx::default();
        let ev = Ev::new(&gs, &metas);
        let t = Term::app(Term::app(tm(T::Global(g)), tm(T::Var(Ix(0))), Icit::Expl), Term::numeral(3), Icit::Expl);
        let v = ev.eval(&identity_env(1), &t);
        assert!(matches!(&*v, Value::Neutral(Head::Global(h), sp) if *h == g && sp.len() == 2));
        // Stuck on the first argument, so the second is never inspected.
        let t2 = Term::app(Term::app(tm(T::Global(g)), Term::numeral(1), Icit::Expl), tm(T::Var(Ix(0))), Icit::Expl);
        assert!(matches!(&*ev.eval(&identity_env(1), &t2), Value::Suc(_)));
    }

    #[test]
    fn eliminations() {
        let gs = Globals::default();
        let metas = MetaCtx::default();
        let ev = Ev::new(&gs, &metas);
        let pair = tm(T::Pair(tm(T::Zero), tm(T::Tt)));
        assert_eq!(*ev.eval(&vec![], &T::Fst(pair)), Value::Zero);
        let j = T::J(tm(T::Unit), tm(T::Nat), tm(T::Refl));
        assert_eq!(*ev.eval(&vec![], &j), Value::Nat);
        let lower = T::Lower(tm(T::LiftIntro(tm(T::Tt))));
        assert_eq!(*ev.eval(&vec![], &lower), Value::Tt);
        let m = ev.eval(&vec![], &T::Fst(tm(T::Meta(MetaId(0)))));
        assert_eq!(*m, Value::Neutral(Head::Meta(MetaId(0)), vec![Elim::Fst]));
    }

    #[test]
    fn quote_identity_and_neutral_spine() {
        let gs = Globals::default();
        let metas = MetaCtx::default();
        let ev = Ev::new(&gs, &metas);
        let id = T::Lam("x".into(), Icit::Expl, tm(T::Var(Ix(0))));
        assert_eq!(*ev.nf(&vec![], &id), id);
        let app = T::App(tm(T::Meta(MetaId(3))), tm(T::Var(Ix(0))), Icit::Expl);
        assert_eq!(*ev.nf(&identity_env(1), &app), app);
    }

    #[test]
    fn level_normalisation() {
        let gs = Globals::default();
        let metas = MetaCtx::default();
        let ev = Ev::new(&gs, &metas);
        let a = tm(T::Var(Ix(0)));
        let t = T::LSuc(tm(T::LMax(a.clone(), tm(T::LZero))));
        let env = identity_env(1);
        assert_eq!(ev.level_key(1, &ev.eval(&env, &t)), ev.level_key(1, &ev.eval(&env, &T::LSuc(a.clone()))));
        assert_eq!(*ev.nf(&env, &T::LMax(a.clone(), a.clone())), *a);
    }
}
