//! Core terms and clausal definitions.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

pub type Name = Rc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Icit {
    Expl,
    Impl,
}

/// De Bruijn index: counts binders outwards from the use site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ix(pub usize);

/// De Bruijn level: counts binders inwards from the root of the context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lvl(pub usize);

impl Lvl {
    pub fn to_ix(self, depth: usize) -> Ix {
        Ix(depth - self.0 - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaId(pub u32);

/// A source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalId(pub u32);

impl fmt::Display for MetaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

pub type Tm = Rc<Term>;

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(Ix),
    Global(GlobalId),
    Meta(MetaId),
    App(Tm, Tm, Icit),
    Lam(Name, Icit, Tm),
    /// Domain, domain level, codomain, codomain level (under the binder).
    Pi(Name, Icit, Tm, Option<Tm>, Tm, Option<Tm>),
    Sigma(Name, Tm, Option<Tm>, Tm, Option<Tm>),
    Pair(Tm, Tm),
    Fst(Tm),
    Snd(Tm),
    Unit,
    Tt,
    Empty,
    /// Motive type, target.
    Absurd(Tm, Tm),
    Nat,
    Zero,
    Suc(Tm),
    List(Tm),
    Nil,
    Cons(Tm, Tm),
    Id(Tm, Tm, Tm),
    Refl,
    /// Motive, refl case, equation.
    J(Tm, Tm, Tm),
    Lift(Tm, Tm),
    LiftIntro(Tm),
    Lower(Tm),
    Sort(Tm),
    Level,
    LZero,
    LSuc(Tm),
    LMax(Tm, Tm),
    Let(Name, Tm, Tm, Tm),
}

impl Term {
    pub fn app(f: Tm, a: Tm, icit: Icit) -> Tm {
        Rc::new(Term::App(f, a, icit))
    }

    pub fn numeral(n: u64) -> Tm {
        (0..n).fold(Rc::new(Term::Zero), |acc, _| Rc::new(Term::Suc(acc)))
    }

    /// Splits an application spine into its head and arguments.
    pub fn spine(&self) -> (&Term, Vec<(&Tm, Icit)>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a, i) = cur {
            args.push((a, *i));
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Calls `f` on each immediate subterm with the number of binders it sits under.
    pub fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Term, usize)) {
        use Term::*;
        match self {
            Var(_) | Global(_) | Meta(_) | Unit | Tt | Empty | Nat | Zero | Nil | Refl | Level | LZero => {}
            App(a, b, _) | Pair(a, b) | Absurd(a, b) | Cons(a, b) | Lift(a, b) | LMax(a, b) => {
                f(a, 0);
                f(b, 0);
            }
            Lam(_, _, b) => f(b, 1),
            Pi(_, _, a, al, b, bl) | Sigma(_, a, al, b, bl) => {
                f(a, 0);
                if let Some(al) = al {
                    f(al, 0);
                }
                f(b, 1);
                if let Some(bl) = bl {
                    f(bl, 1);
                }
            }
            Fst(a) | Snd(a) | Suc(a) | List(a) | LiftIntro(a) | Lower(a) | Sort(a) | LSuc(a) => f(a, 0),
            Id(a, b, c) | J(a, b, c) => {
                f(a, 0);
                f(b, 0);
                f(c, 0);
            }
            Let(_, a, t, u) => {
                f(a, 0);
                f(t, 0);
                f(u, 1);
            }
        }
    }

    /// True if the variable with index `ix` (relative to this term) occurs.
    pub fn mentions_var(&self, ix: usize) -> bool {
        match self {
            Term::Var(Ix(i)) => *i == ix,
            _ => {
                let mut found = false;
                self.for_each_child(|c, under| found = found || c.mentions_var(ix + under));
                found
            }
        }
    }

    pub fn mentions_meta(&self, m: MetaId) -> bool {
        match self {
            Term::Meta(x) => *x == m,
            _ => {
                let mut found = false;
                self.for_each_child(|c, _| found = found || c.mentions_meta(m));
                found
            }
        }
    }

    pub fn metas(&self, out: &mut BTreeSet<MetaId>) {
        match self {
            Term::Meta(x) => {
                out.insert(*x);
            }
            _ => self.for_each_child(|c, _| c.metas(out)),
        }
    }

    /// Structural equality ignoring binder names.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        use Term::*;
        let opt = |a: &Option<Tm>, b: &Option<Tm>| match (a, b) {
            (Some(a), Some(b)) => a.alpha_eq(b),
            (None, None) => true,
            _ => false,
        };
        match (self, other) {
            (Lam(_, i, b), Lam(_, j, c)) => i == j && b.alpha_eq(c),
            (Pi(_, i, a, al, b, bl), Pi(_, j, c, cl, d, dl)) => {
                i == j && a.alpha_eq(c) && opt(al, cl) && b.alpha_eq(d) && opt(bl, dl)
            }
            (Sigma(_, a, al, b, bl), Sigma(_, c, cl, d, dl)) => {
                a.alpha_eq(c) && opt(al, cl) && b.alpha_eq(d) && opt(bl, dl)
            }
            (Let(_, a, t, u), Let(_, b, s, v)) => a.alpha_eq(b) && t.alpha_eq(s) && u.alpha_eq(v),
            (App(f, a, i), App(g, b, j)) => i == j && f.alpha_eq(g) && a.alpha_eq(b),
            (Pair(a, b), Pair(c, d))
            | (Absurd(a, b), Absurd(c, d))
            | (Cons(a, b), Cons(c, d))
            | (Lift(a, b), Lift(c, d))
            | (LMax(a, b), LMax(c, d)) => a.alpha_eq(c) && b.alpha_eq(d),
            (Fst(a), Fst(b))
            | (Snd(a), Snd(b))
            | (Suc(a), Suc(b))
            | (List(a), List(b))
            | (LiftIntro(a), LiftIntro(b))
            | (Lower(a), Lower(b))
            | (Sort(a), Sort(b))
            | (LSuc(a), LSuc(b)) => a.alpha_eq(b),
            (Id(a, b, c), Id(d, e, f)) | (J(a, b, c), J(d, e, f)) => {
                a.alpha_eq(d) && b.alpha_eq(e) && c.alpha_eq(f)
            }
            (a, b) => a == b,
        }
    }
}

/// Checks that every variable index is bound, either by an enclosing binder
/// or by one of the `depth` variables of the surrounding context.
/// `known_global` and `known_meta` decide whether references resolve.
pub fn well_scoped(
    t: &Term,
    depth: usize,
    known_global: &dyn Fn(GlobalId) -> bool,
    known_meta: &dyn Fn(MetaId) -> bool,
) -> bool {
    match t {
        Term::Var(Ix(i)) => *i < depth,
        Term::Global(g) => known_global(*g),
        Term::Meta(m) => known_meta(*m),
        _ => {
            let mut ok = true;
            t.for_each_child(|c, under| ok = ok && well_scoped(c, depth + under, known_global, known_meta));
            ok
        }
    }
}

/// Shorthand for [`well_scoped`] when all globals and metas are known.
pub fn well_scoped_at(t: &Term, depth: usize) -> bool {
    well_scoped(t, depth, &|_| true, &|_| true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ctor {
    Zero,
    Suc,
    Nil,
    Cons,
}

impl Ctor {
    pub fn arity(self) -> usize {
        match self {
            Ctor::Zero | Ctor::Nil => 0,
            Ctor::Suc => 1,
            Ctor::Cons => 2,
        }
    }

    /// Every constructor of the same type, including `self`.
    pub fn siblings(self) -> &'static [Ctor] {
        match self {
            Ctor::Zero | Ctor::Suc => &[Ctor::Zero, Ctor::Suc],
            Ctor::Nil | Ctor::Cons => &[Ctor::Nil, Ctor::Cons],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ctor::Zero => "zero",
            Ctor::Suc => "suc",
            Ctor::Nil => "nil",
            Ctor::Cons => "cons",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Var(Name),
    Ctor(Ctor, Vec<Pattern>),
}

impl Pattern {
    pub fn is_var(&self) -> bool {
        matches!(self, Pattern::Var(_))
    }

    pub fn var_count(&self) -> usize {
        match self {
            Pattern::Var(_) => 1,
            Pattern::Ctor(_, ps) => ps.iter().map(Pattern::var_count).sum(),
        }
    }

    pub fn var_names(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Ctor(_, ps) => ps.iter().for_each(|p| p.var_names(out)),
        }
    }

    /// The pattern read as a term, with its first variable at level `first`
    /// of a context of `depth` variables.
    pub fn to_term(&self, first: &mut usize, depth: usize) -> Tm {
        match self {
            Pattern::Var(_) => {
                let t = Rc::new(Term::Var(Lvl(*first).to_ix(depth)));
                *first += 1;
                t
            }
            Pattern::Ctor(c, ps) => {
                let args: Vec<Tm> = ps.iter().map(|p| p.to_term(first, depth)).collect();
                Rc::new(match c {
                    Ctor::Zero => Term::Zero,
                    Ctor::Nil => Term::Nil,
                    Ctor::Suc => Term::Suc(args[0].clone()),
                    Ctor::Cons => Term::Cons(args[0].clone(), args[1].clone()),
                })
            }
        }
    }

    /// Every proper subpattern, each paired with the level of its first variable.
    fn proper_subterms(&self, first: usize, depth: usize, out: &mut Vec<Tm>) {
        if let Pattern::Ctor(_, ps) = self {
            let mut next = first;
            for p in ps {
                let mut cursor = next;
                out.push(p.to_term(&mut cursor, depth));
                p.proper_subterms(next, depth, out);
                next += p.var_count();
            }
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) => write!(f, "{x}"),
            Pattern::Ctor(c, ps) if ps.is_empty() => write!(f, "{}", c.name()),
            Pattern::Ctor(c, ps) => {
                write!(f, "({}", c.name())?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    /// One pattern per covered argument position, implicit ones included.
    pub patterns: Vec<Pattern>,
    /// Scoped over the pattern variables, left to right.
    pub rhs: Tm,
    pub line: u32,
}

impl Clause {
    pub fn var_count(&self) -> usize {
        self.patterns.iter().map(Pattern::var_count).sum()
    }
}

/// The rigid shape a clause right-hand side reduces to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadKind {
    Pi,
    Sigma,
    Sort,
    Nat,
    List,
    Unit,
    Empty,
    Id,
    Lift,
    Level,
    Zero,
    Suc,
    Nil,
    Cons,
    Tt,
    Refl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadSummary {
    Rigid(HeadKind),
    Flexible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClauseDef {
    pub name: Name,
    pub global: GlobalId,
    pub ty: Tm,
    /// Number of argument positions the clauses bind.
    pub arity: usize,
    pub matched: BTreeSet<usize>,
    pub clauses: Vec<Clause>,
    /// Per-clause head summary, for definitions matching on one position.
    pub summary: Option<Vec<HeadSummary>>,
}

impl ClauseDef {
    pub fn new(name: Name, global: GlobalId, ty: Tm, clauses: Vec<Clause>) -> Self {
        let arity = clauses.first().map_or(0, |c| c.patterns.len());
        let matched = clauses
            .iter()
            .flat_map(|c| c.patterns.iter().enumerate().filter(|(_, p)| !p.is_var()).map(|(i, _)| i))
            .collect();
        ClauseDef { name, global, ty, arity, matched, clauses, summary: None }
    }

    pub fn single_matched_position(&self) -> Option<usize> {
        match self.matched.len() {
            1 => self.matched.iter().next().copied(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ClauseError {
    #[error("coverage error in `{name}`: missing case {missing}")]
    Coverage { name: Name, missing: String },
    #[error("overlap error in `{name}`: clauses {first} and {second} overlap")]
    Overlap { name: Name, first: usize, second: usize },
    #[error("termination error in `{name}`: recursive call in clause {clause} is not structurally smaller")]
    Termination { name: Name, clause: usize },
    #[error("arity error in `{name}`: clause {clause} binds {found} arguments, expected {expected}")]
    Arity { name: Name, clause: usize, expected: usize, found: usize },
}

/// Validates coverage, disjointness and structural recursion, then records
/// the head summary computed by `summarize` for single-position definitions.
pub fn check_clauses(
    def: &mut ClauseDef,
    summarize: impl Fn(&ClauseDef, usize) -> HeadSummary,
) -> Result<(), ClauseError> {
    for (i, c) in def.clauses.iter().enumerate() {
        if c.patterns.len() != def.arity {
            return Err(ClauseError::Arity {
                name: def.name.clone(),
                clause: i + 1,
                expected: def.arity,
                found: c.patterns.len(),
            });
        }
    }
    if def.clauses.is_empty() {
        return Err(ClauseError::Coverage { name: def.name.clone(), missing: "(no clauses)".into() });
    }
    for i in 0..def.clauses.len() {
        for j in i + 1..def.clauses.len() {
            if overlaps(&def.clauses[i].patterns, &def.clauses[j].patterns) {
                return Err(ClauseError::Overlap { name: def.name.clone(), first: i + 1, second: j + 1 });
            }
        }
    }
    let rows: Vec<Vec<Pattern>> = def.clauses.iter().map(|c| c.patterns.clone()).collect();
    if let Some(missing) = missing_case(&rows, def.arity) {
        let shown: Vec<String> = missing.iter().map(|p| p.to_string()).collect();
        return Err(ClauseError::Coverage { name: def.name.clone(), missing: shown.join(" ") });
    }
    check_termination(def)?;
    def.summary = def
        .single_matched_position()
        .map(|_| (0..def.clauses.len()).map(|i| summarize(def, i)).collect());
    Ok(())
}

fn pattern_overlaps(p: &Pattern, q: &Pattern) -> bool {
    match (p, q) {
        (Pattern::Var(_), _) | (_, Pattern::Var(_)) => true,
        (Pattern::Ctor(c, ps), Pattern::Ctor(d, qs)) => c == d && overlaps(ps, qs),
    }
}

fn overlaps(ps: &[Pattern], qs: &[Pattern]) -> bool {
    ps.iter().zip(qs).all(|(p, q)| pattern_overlaps(p, q))
}

fn wildcard() -> Pattern {
    Pattern::Var("_".into())
}

/// Returns a value vector no row matches, if one exists.
fn missing_case(rows: &[Vec<Pattern>], width: usize) -> Option<Vec<Pattern>> {
    if width == 0 {
        return if rows.is_empty() { Some(Vec::new()) } else { None };
    }
    let head_ctor = rows.iter().find_map(|r| match &r[0] {
        Pattern::Ctor(c, _) => Some(*c),
        Pattern::Var(_) => None,
    });
    match head_ctor {
        None => {
            let rest: Vec<Vec<Pattern>> = rows.iter().map(|r| r[1..].to_vec()).collect();
            missing_case(&rest, width - 1).map(|mut m| {
                m.insert(0, wildcard());
                m
            })
        }
        Some(c) => {
            for &k in c.siblings() {
                let n = k.arity();
                let specialized: Vec<Vec<Pattern>> = rows
                    .iter()
                    .filter_map(|r| match &r[0] {
                        Pattern::Var(_) => {
                            let mut row = vec![wildcard(); n];
                            row.extend_from_slice(&r[1..]);
                            Some(row)
                        }
                        Pattern::Ctor(d, ps) if *d == k => {
                            let mut row = ps.clone();
                            row.extend_from_slice(&r[1..]);
                            Some(row)
                        }
                        Pattern::Ctor(..) => None,
                    })
                    .collect();
                if let Some(mut m) = missing_case(&specialized, n + width - 1) {
                    let rest = m.split_off(n);
                    let mut out = vec![Pattern::Ctor(k, m)];
                    out.extend(rest);
                    return Some(out);
                }
            }
            None
        }
    }
}

/// Collects the argument lists of calls to `g` in `t`, with the binder
/// depth at which each call sits.
fn recursive_calls<'a>(t: &'a Term, g: GlobalId, under: usize, out: &mut Vec<(Vec<&'a Tm>, usize)>) {
    let (head, args) = t.spine();
    if matches!(head, Term::Global(h) if *h == g) {
        out.push((args.iter().map(|(a, _)| *a).collect(), under));
        for (a, _) in args {
            recursive_calls(a, g, under, out);
        }
        return;
    }
    t.for_each_child(|c, k| recursive_calls(c, g, under + k, out));
}

fn shift(t: &Term, by: usize, cutoff: usize) -> Tm {
    fn go(t: &Term, by: usize, cutoff: usize) -> Term {
        match t {
            Term::Var(Ix(i)) if *i >= cutoff => Term::Var(Ix(i + by)),
            _ => map_children(t, |c, under| Rc::new(go(c, by, cutoff + under))),
        }
    }
    Rc::new(go(t, by, cutoff))
}

/// Rebuilds a term with each immediate child replaced by `f(child, binders)`.
pub fn map_children(t: &Term, mut f: impl FnMut(&Term, usize) -> Tm) -> Term {
    use Term::*;
    let opt = |x: &Option<Tm>, under: usize, f: &mut dyn FnMut(&Term, usize) -> Tm| x.as_ref().map(|x| f(x, under));
    match t {
        Var(_) | Global(_) | Meta(_) | Unit | Tt | Empty | Nat | Zero | Nil | Refl | Level | LZero => t.clone(),
        App(a, b, i) => App(f(a, 0), f(b, 0), *i),
        Pair(a, b) => Pair(f(a, 0), f(b, 0)),
        Absurd(a, b) => Absurd(f(a, 0), f(b, 0)),
        Cons(a, b) => Cons(f(a, 0), f(b, 0)),
        Lift(a, b) => Lift(f(a, 0), f(b, 0)),
        LMax(a, b) => LMax(f(a, 0), f(b, 0)),
        Lam(x, i, b) => Lam(x.clone(), *i, f(b, 1)),
        Pi(x, i, a, al, b, bl) => {
            let a2 = f(a, 0);
            let al2 = opt(al, 0, &mut f);
            let b2 = f(b, 1);
            let bl2 = opt(bl, 1, &mut f);
            Pi(x.clone(), *i, a2, al2, b2, bl2)
        }
        Sigma(x, a, al, b, bl) => {
            let a2 = f(a, 0);
            let al2 = opt(al, 0, &mut f);
            let b2 = f(b, 1);
            let bl2 = opt(bl, 1, &mut f);
            Sigma(x.clone(), a2, al2, b2, bl2)
        }
        Fst(a) => Fst(f(a, 0)),
        Snd(a) => Snd(f(a, 0)),
        Suc(a) => Suc(f(a, 0)),
        List(a) => List(f(a, 0)),
        LiftIntro(a) => LiftIntro(f(a, 0)),
        Lower(a) => Lower(f(a, 0)),
        Sort(a) => Sort(f(a, 0)),
        LSuc(a) => LSuc(f(a, 0)),
        Id(a, b, c) => Id(f(a, 0), f(b, 0), f(c, 0)),
        J(a, b, c) => J(f(a, 0), f(b, 0), f(c, 0)),
        Let(x, a, s, u) => Let(x.clone(), f(a, 0), f(s, 0), f(u, 1)),
    }
}

fn check_termination(def: &ClauseDef) -> Result<(), ClauseError> {
    let per_clause: Vec<Vec<(Vec<&Tm>, usize)>> = def
        .clauses
        .iter()
        .map(|c| {
            let mut calls = Vec::new();
            recursive_calls(&c.rhs, def.global, 0, &mut calls);
            calls
        })
        .collect();
    if per_clause.iter().all(Vec::is_empty) {
        return Ok(());
    }
    let decreases_at = |pos: usize, clause: &Clause, calls: &[(Vec<&Tm>, usize)]| {
        let depth = clause.var_count();
        let first: usize = clause.patterns[..pos].iter().map(Pattern::var_count).sum();
        let mut smaller = Vec::new();
        clause.patterns[pos].proper_subterms(first, depth, &mut smaller);
        calls.iter().all(|(args, under)| {
            args.get(pos).is_some_and(|arg| smaller.iter().any(|s| shift(s, *under, 0).alpha_eq(arg)))
        })
    };
    let found = def.matched.iter().any(|&pos| {
        def.clauses.iter().zip(&per_clause).all(|(c, calls)| decreases_at(pos, c, calls))
    });
    if found {
        return Ok(());
    }
    let culprit = per_clause.iter().position(|calls| !calls.is_empty()).unwrap_or(0);
    Err(ClauseError::Termination { name: def.name.clone(), clause: culprit + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(x: &str) -> Pattern {
        Pattern::Var(x.into())
    }
    fn suc(p: Pattern) -> Pattern {
        Pattern::Ctor(Ctor::Suc, vec![p])
    }
    fn zero() -> Pattern {
        Pattern::Ctor(Ctor::Zero, vec![])
    }
    fn v(i: usize) -> Tm {
        Rc::new(Term::Var(Ix(i)))
    }
    const SELF: GlobalId = GlobalId(7);
    fn call(args: Vec<Tm>) -> Tm {
        args.into_iter().fold(Rc::new(Term::Global(SELF)), |f, a| Term::app(f, a, Icit::Expl))
    }
    fn def(clauses: Vec<(Vec<Pattern>, Tm)>) -> ClauseDef {
        ClauseDef::new(
            "f".into(),
            SELF,
            Rc::new(Term::Nat),
            clauses.into_iter().map(|(patterns, rhs)| Clause { patterns, rhs, line: 0 }).collect(),
        )
    }

    #[test]
    fn scoping() {
        let t = Term::Var(Ix(0));
        assert!(well_scoped_at(&t, 1));
        assert!(!well_scoped_at(&t, 0));
        assert!(well_scoped_at(&Term::Lam("x".into(), Icit::Expl, v(0)), 0));
        assert!(!well_scoped_at(&Term::Lam("x".into(), Icit::Expl, v(1)), 0));
    }

    #[test]
    fn nary_shaped_definition_is_accepted() {
        // f zero A = A ; f (suc n) A = Nat -> f n A
        let pi = Rc::new(Term::Pi("_".into(), Icit::Expl, Rc::new(Term::Nat), None, call(vec![v(2), v(1)]), None));
        let mut d = def(vec![(vec![zero(), var("A")], v(0)), (vec![suc(var("n")), var("A")], pi)]);
        check_clauses(&mut d, |_, i| if i == 0 { HeadSummary::Flexible } else { HeadSummary::Rigid(HeadKind::Pi) })
            .unwrap();
        assert_eq!(d.single_matched_position(), Some(0));
        assert_eq!(d.summary, Some(vec![HeadSummary::Flexible, HeadSummary::Rigid(HeadKind::Pi)]));
    }

    #[test]
    fn zero_one_and_double_successor_cover() {
        // f 0 = 0 ; f 1 = 0 ; f (suc (suc n)) = f (suc n)
        let rec = call(vec![Rc::new(Term::Suc(v(0)))]);
        let mut d = def(vec![
            (vec![zero()], Rc::new(Term::Zero)),
            (vec![suc(zero())], Rc::new(Term::Zero)),
            (vec![suc(suc(var("n")))], rec),
        ]);
        assert_eq!(check_clauses(&mut d, |_, _| HeadSummary::Flexible), Ok(()));
    }

    #[test]
    fn missing_successor_case() {
        let mut d = def(vec![(vec![zero()], Rc::new(Term::Zero))]);
        assert!(matches!(check_clauses(&mut d, |_, _| HeadSummary::Flexible), Err(ClauseError::Coverage { .. })));
    }

    #[test]
    fn overlapping_clauses() {
        let mut d = def(vec![(vec![zero()], Rc::new(Term::Zero)), (vec![var("n")], Rc::new(Term::Zero))]);
        assert!(matches!(
            check_clauses(&mut d, |_, _| HeadSummary::Flexible),
            Err(ClauseError::Overlap { first: 1, second: 2, .. })
        ));
    }

    #[test]
    fn same_pattern_recursion_is_rejected() {
        // f zero = zero ; f (suc n) = f (suc n)
        let rec = call(vec![Rc::new(Term::Suc(v(0)))]);
        let mut d = def(vec![(vec![zero()], Rc::new(Term::Zero)), (vec![suc(var("n"))], rec)]);
        assert!(matches!(
            check_clauses(&mut d, |_, _| HeadSummary::Flexible),
            Err(ClauseError::Termination { clause: 2, .. })
        ));
    }

    #[test]
    fn recursion_under_a_binder_is_shifted() {
        // f (suc n) = \x. f n
        let rhs = Rc::new(Term::Lam("x".into(), Icit::Expl, call(vec![v(1)])));
        let mut d = def(vec![(vec![zero()], Rc::new(Term::Zero)), (vec![suc(var("n"))], rhs)]);
        assert_eq!(check_clauses(&mut d, |_, _| HeadSummary::Flexible), Ok(()));
    }

    #[test]
    fn list_coverage_two_columns() {
        let nil = || Pattern::Ctor(Ctor::Nil, vec![]);
        let cons = |a, b| Pattern::Ctor(Ctor::Cons, vec![a, b]);
        let mut d = def(vec![
            (vec![nil(), var("ys")], Rc::new(Term::Nil)),
            (vec![cons(var("x"), var("xs")), nil()], Rc::new(Term::Nil)),
        ]);
        match check_clauses(&mut d, |_, _| HeadSummary::Flexible) {
            Err(ClauseError::Coverage { missing, .. }) => assert_eq!(missing, "(cons _ _) (cons _ _)"),
            other => panic!("{other:?}"),
        }
    }
}
