//! Worked examples for the evaluator, the meta store, the unifier and the
//! elaborator.

mod common;

use std::rc::Rc;

use common::prelude;
use nary_kernel::driver::{FileReport, Outcome};
use nary_kernel::elab::Ctx;
use nary_kernel::meta::{solve_meta, MetaReason, SolveError};
use nary_kernel::parse::parse_expr;
use nary_kernel::pretty::show_term;
use nary_kernel::syntax::{Icit, Ix, Span, Term, Tm};
use nary_kernel::unify::UErr;
use nary_kernel::value::{Elim, Head, Value};
use nary_kernel::{Flags, Options, Session};

/// Elaborates an expression in the empty context and solves its constraints.
fn elab(s: &mut Session, src: &str) -> (Tm, nary_kernel::value::Val) {
    let e = parse_expr(src).unwrap();
    let (t, ty) = s.tc.infer(&mut Ctx::default(), &e).unwrap();
    s.tc.solve_all().unwrap();
    (t, ty)
}

fn nf_of(s: &mut Session, src: &str) -> String {
    let (t, _) = elab(s, src);
    let ev = s.tc.ev();
    show_term(&s.tc.globals, &[], &ev.nf(&Vec::new(), &t))
}

fn run(src: &str) -> FileReport {
    prelude().check_source(src).unwrap()
}

fn headlines(r: &FileReport) -> Vec<String> {
    r.decls.iter().map(|d| d.headline()).collect()
}

fn tm(t: Term) -> Tm {
    Rc::new(t)
}

// Evaluation.

#[test]
fn arrows_unfold_to_a_pi_chain() {
    let mut s = prelude();
    assert_eq!(nf_of(&mut s, "Arrows 2 (Nat , (List Nat , lift tt)) Nat"), "Nat -> List Nat -> Nat");
    assert_eq!(nf_of(&mut s, "plus 2 3"), "5");
}

#[test]
fn arrows_on_an_unknown_arity_is_stuck_until_solved() {
    let mut s = prelude();
    let (t, _) = elab(&mut s, "Arrows _ _ Nat");
    let ev = s.tc.ev();
    let v = ev.force(&ev.eval(&Vec::new(), &t));
    let Value::Neutral(Head::Global(g), sp) = &*v else { panic!("not stuck: {v:?}") };
    assert_eq!(&*s.tc.globals.get(*g).name, "Arrows");
    let Elim::App(n, _) = &sp[0] else { panic!() };
    let Some(n) = ev.force(n).flex_meta() else { panic!("arity is not a meta") };

    let k = s.tc.fresh_meta(&Ctx::default(), &Rc::new(Value::Nat), Span::default(), MetaReason::Underscore);
    solve_meta(&mut s.tc.metas, &s.tc.globals, n, tm(Term::Suc(k))).unwrap();
    let ev = s.tc.ev();
    assert!(matches!(&*ev.force(&v), Value::Pi(..)));
}

#[test]
fn eliminations() {
    let mut s = prelude();
    assert_eq!(nf_of(&mut s, "fst ((1 , 2) : Nat * Nat)"), "1");
    assert_eq!(nf_of(&mut s, "lower (lift {lsuc lzero} 3)"), "3");
    assert_eq!(nf_of(&mut s, "J (\\y e. Nat) 7 (refl : Id Nat 1 1)"), "7");

    let m = s.tc.fresh_meta(&Ctx::default(), &Rc::new(Value::Sigma("_".into(), Rc::new(Value::Nat), None, nat_closure(), None)), Span::default(), MetaReason::Underscore);
    let ev = s.tc.ev();
    let v = ev.elim(ev.eval(&Vec::new(), &m), Elim::Fst);
    assert!(matches!(&*v, Value::Neutral(Head::Meta(_), sp) if matches!(sp.as_slice(), [Elim::Fst])));
}

fn nat_closure() -> nary_kernel::value::Closure {
    nary_kernel::value::Closure { env: Vec::new(), body: tm(Term::Nat) }
}

#[test]
fn quote_reads_back_lambdas_and_neutral_metas() {
    let mut s = prelude();
    assert_eq!(nf_of(&mut s, "((\\x. x) : Nat -> Nat)"), "\\x. x");
    let nat_to_nat = Rc::new(Value::Pi("_".into(), Icit::Expl, Rc::new(Value::Nat), None, nat_closure(), None));
    let f = s.tc.fresh_meta(&Ctx::default(), &nat_to_nat, Span::default(), MetaReason::Underscore);
    let ev = s.tc.ev();
    let v = ev.apply(ev.eval(&Vec::new(), &f), Value::var(nary_kernel::syntax::Lvl(0)), Icit::Expl);
    let q = ev.quote(1, &v);
    assert!(matches!(&*q, Term::App(h, x, Icit::Expl) if matches!(**h, Term::Meta(_)) && matches!(**x, Term::Var(Ix(0)))));
}

#[test]
fn normal_forms_of_nary_programs() {
    let mut s = prelude();
    s.check_source("postulate f : Nat * (Nat * Unit) -> Nat\npostulate a : Level\npostulate b : Level\n").unwrap();
    let lhs = nf_of(&mut s, "curryn 2 {_} {(Nat , (Nat , lift tt))} f 1 2");
    assert_eq!(lhs, nf_of(&mut s, "f (1 , (2 , tt))"));
    assert_eq!(nf_of(&mut s, "congn 2 plus {2} {2} refl {3} {3} refl"), "refl");
    assert_eq!(nf_of(&mut s, "sup 2 (a , (b , tt))"), "lmax a b");
}

#[test]
fn normalization_is_idempotent_on_prelude_types() {
    let s = prelude();
    let ev = s.tc.ev();
    let mut seen = 0;
    for g in 0..s.tc.globals.len() {
        let entry = s.tc.globals.get(nary_kernel::syntax::GlobalId(g as u32));
        let once = ev.nf(&Vec::new(), &entry.ty);
        let twice = ev.nf(&Vec::new(), &once);
        assert_eq!(once, twice, "{}", entry.name);
        seen += 1;
    }
    assert!(seen > 30);
}

// Metas.

#[test]
fn fresh_metas_abstract_over_the_context() {
    let mut s = prelude();
    let set0 = Value::sort(nary_kernel::level::LevelNF::zero());
    let a = s.tc.fresh_meta(&Ctx::default(), &set0, Span::default(), MetaReason::Underscore);
    let b = s.tc.fresh_meta(&Ctx::default(), &set0, Span::default(), MetaReason::Underscore);
    assert!(matches!((&*a, &*b), (Term::Meta(x), Term::Meta(y)) if x != y));
    let mut ctx = Ctx::default();
    ctx.bind("x".into(), Rc::new(Value::Nat), true);
    let c = s.tc.fresh_meta(&ctx, &Rc::new(Value::Nat), Span::default(), MetaReason::Underscore);
    assert!(matches!(&*c, Term::App(h, x, Icit::Expl) if matches!(**h, Term::Meta(_)) && matches!(**x, Term::Var(Ix(0)))));
}

#[test]
fn solve_meta_checks_occurs_and_scope() {
    let mut s = prelude();
    let set0 = Value::sort(nary_kernel::level::LevelNF::zero());
    let fresh = |s: &mut Session| match &*s.tc.fresh_meta(&Ctx::default(), &set0, Span::default(), MetaReason::Underscore) {
        Term::Meta(m) => *m,
        _ => unreachable!(),
    };
    let a = fresh(&mut s);
    let arrow = tm(Term::Pi("_".into(), Icit::Expl, tm(Term::Nat), None, tm(Term::Nat), None));
    assert_eq!(solve_meta(&mut s.tc.metas, &s.tc.globals, a, arrow.clone()), Ok(()));
    assert_eq!(solve_meta(&mut s.tc.metas, &s.tc.globals, a, arrow), Err(SolveError::AlreadySolved(a)));

    let b = fresh(&mut s);
    let cyclic = tm(Term::List(tm(Term::Meta(b))));
    assert_eq!(solve_meta(&mut s.tc.metas, &s.tc.globals, b, cyclic), Err(SolveError::Occurs(b)));

    let c = fresh(&mut s);
    assert_eq!(solve_meta(&mut s.tc.metas, &s.tc.globals, c, tm(Term::Var(Ix(0)))), Err(SolveError::Scope(c)));
}

#[test]
fn zonk_substitutes_solutions_and_is_idempotent() {
    let mut s = prelude();
    let set0 = Value::sort(nary_kernel::level::LevelNF::zero());
    let a = s.tc.fresh_meta(&Ctx::default(), &set0, Span::default(), MetaReason::Underscore);
    let Term::Meta(m) = &*a else { unreachable!() };
    let t = tm(Term::Pi("_".into(), Icit::Expl, a.clone(), None, a.clone(), None));
    solve_meta(&mut s.tc.metas, &s.tc.globals, *m, tm(Term::Nat)).unwrap();
    let ev = s.tc.ev();
    let z = ev.zonk(0, &t);
    assert_eq!(show_term(&s.tc.globals, &[], &z), "Nat -> Nat");
    assert_eq!(ev.zonk(0, &z), z);
    let plain = tm(Term::List(tm(Term::Nat)));
    assert_eq!(ev.zonk(0, &plain), plain);
}

#[test]
fn postponed_level_constraint_is_reported_with_both_sides() {
    let r = run("postulate a : Level\n#expect unsolved\n_ : Id Level (lmax _ a) a\n_ = refl\n");
    assert!(r.all_expected(), "{}", r.render(Flags::default()));
    let d = &r.decls[1];
    assert_eq!(d.outcome, Outcome::Unsolved { metas: 1, constraints: 1 });
    let sides = d.details[1].rsplit(" : ").next().unwrap();
    assert!(sides.starts_with("lmax ") && sides.contains(" ?") && sides.ends_with(" a ≈ a") || sides.starts_with("lmax a ?"), "{sides}");
}

// Unification.

#[test]
fn miller_pattern_is_abstracted() {
    let mut s = prelude();
    let r = s.check_source("test : (x : Nat) -> (y : Nat) -> Id Nat _ (plus x y)\ntest = \\x y. refl\n").unwrap();
    assert_eq!(r.decls[0].outcome, Outcome::Ok);
    assert!(r.decls[0].metas.iter().any(|l| l.ends_with(":= \\x y. plus x y")), "{:?}", r.decls[0].metas);
}

#[test]
fn non_linear_spine_is_postponed() {
    let mut s = prelude();
    let nat2 = parse_expr("Nat -> Nat -> Nat").unwrap();
    let (ty, _) = s.tc.check_type(&mut Ctx::default(), &nat2).unwrap();
    let ty = s.tc.ev().eval(&Vec::new(), &ty);
    let f = s.tc.fresh_meta(&Ctx::default(), &ty, Span::default(), MetaReason::Underscore);
    let ev = s.tc.ev();
    let x = Value::var(nary_kernel::syntax::Lvl(0));
    let fxx = ev.apply(ev.apply(ev.eval(&Vec::new(), &f), x.clone(), Icit::Expl), x.clone(), Icit::Expl);
    let res = s.tc.unify(&["x".into()], &fxx, &x);
    assert!(matches!(res, Err(UErr::Stuck(_))), "{res:?}");

    let r = run("#expect unsolved\ntest : let F : Nat -> Nat -> Nat = _ in (x : Nat) -> Id Nat (F x x) x\ntest = \\x. refl\n");
    assert!(r.all_expected(), "{}", r.render(Flags::default()));
}

#[test]
fn rigid_decomposition() {
    let r = run(concat!(
        "postulate a : Level\n",
        "s : Id (Set (lsuc a)) (Set a) (Set _)\ns = refl\n",
        "n : Id Nat (suc _) 1\nn = refl\n",
        "p : Id Set (Nat -> Nat) (Nat -> _)\np = refl\n",
        "#expect typeerror\nbad : Id Set Nat (_ -> _)\nbad = refl\n",
    ));
    assert!(r.all_expected(), "{}", r.render(Flags::default()));
    assert!(r.get("s").unwrap().metas.iter().any(|l| l.ends_with(":= a")));
    assert!(r.get("n").unwrap().metas.iter().any(|l| l.ends_with(":= 0")));
}

#[test]
fn metas_of_record_type_are_eta_expanded() {
    let options = Options { trace: true, ..Default::default() };
    let mut s = Session::with_prelude(options).unwrap();
    let r = s
        .check_source(concat!(
            "as1 : let as : Sets 1 (lzero , tt) = _ in Id (Sets 1 (lzero , tt)) as (Nat , lift tt)\nas1 = refl\n",
            "proj : let as : Sets 1 (lzero , tt) = _ in Id Set (fst as) Nat\nproj = refl\n",
            "#expect unsolved\nls2 : let ls : Levels 2 = _ in Id Level (fst ls) lzero\nls2 = refl\n",
            "u : let u : Unit = _ in Id Unit u tt\nu = refl\n",
        ))
        .unwrap();
    assert!(r.all_expected(), "{}", r.render(Flags { trace_unify: true, print_metas: true }));
    assert!(r.get("proj").unwrap().trace.iter().any(|l| l.starts_with("RULE eta-meta")));
    let ls2 = r.get("ls2").unwrap();
    assert!(ls2.trace.iter().any(|l| l.starts_with("RULE eta-meta")));
    assert_eq!(ls2.outcome, Outcome::Unsolved { metas: 1, constraints: 0 });
}

#[test]
fn arrows_inverts_to_zero_against_a_sort() {
    let mut s = prelude();
    let r = s.check_source("_ : Id (Set (lsuc lzero)) (Arrows _ _ (Set lzero)) (Set lzero)\n_ = refl\n").unwrap();
    assert_eq!(r.decls[0].outcome, Outcome::Ok, "{}", r.render(Flags::default()));
    let ev = s.tc.inversions.last().unwrap();
    assert_eq!(&*s.tc.globals.get(ev.global).name, "Arrows");
    assert_eq!(ev.chosen, 0);
}

// Elaboration.

#[test]
fn underscore_argument_becomes_a_meta() {
    let r = run("#expect unsolved\nx : Nat\nx = suc _\n");
    assert!(r.all_expected());
    assert_eq!(r.decls[0].outcome, Outcome::Unsolved { metas: 1, constraints: 0 });
    assert!(r.decls[0].details[0].ends_with("(underscore) : Nat"));
}

#[test]
fn implicit_lambda_is_inserted() {
    let r = run("id : {A : Set} -> A -> A\nid = \\x. x\n_ : Id Nat (id 3) 3\n_ = refl\n");
    assert!(r.all_expected(), "{}", r.render(Flags::default()));
}

#[test]
fn substn_inserts_and_solves_its_implicits() {
    let r = run("postulate R : Nat -> Nat -> Set\nt : {x : Nat} -> {y : Nat} -> R x y -> R x y\nt = substn R refl refl\n");
    let t = r.get("t").unwrap();
    assert_eq!(t.outcome, Outcome::Ok);
    assert!(t.metas.iter().any(|l| l.ends_with(":= \\x y. 2")), "{:?}", t.metas);
}

#[test]
fn exists_on_a_unary_predicate_has_arity_one() {
    let r = run("postulate P : Nat -> Set\ne : Set\ne = Exists P\n");
    let e = r.get("e").unwrap();
    assert_eq!(e.outcome, Outcome::Ok);
    assert!(e.metas.iter().any(|l| l.ends_with(":= 1")), "{:?}", e.metas);
}

#[test]
fn ill_typed_clause_is_reported() {
    let r = run("#expect typeerror\nbad : Nat -> Nat\nbad zero = tt\nbad (suc n) = n\nok : Nat\nok = 1\n");
    assert!(r.all_expected(), "{}", r.render(Flags::default()));
    assert_eq!(r.decls.len(), 2);
}

#[test]
fn postulates_are_rigid() {
    let r = run("postulate P : Nat -> Nat -> Set lzero\n#expect typeerror\n_ : Id Set (P 1 2) (P 2 1)\n_ = refl\n");
    assert!(r.all_expected(), "{}", r.render(Flags::default()));
}

#[test]
fn independent_declarations_commute() {
    let a = "ex1 : Set\nex1 = Exists U\n";
    let b = "all2 : Set\nall2 = Foralls R\n";
    let head = "postulate U : Nat -> Set\npostulate R : Nat -> Nat -> Set\n";
    let one = run(&format!("{head}{a}{b}"));
    let two = run(&format!("{head}{b}{a}"));
    let mut h1 = headlines(&one);
    let mut h2 = headlines(&two);
    h1.sort();
    h2.sort();
    assert_eq!(h1, h2);
}
