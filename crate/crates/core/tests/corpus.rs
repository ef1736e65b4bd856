mod common;

use common::{corpus, prelude, read, UNIFIER_FILES};
use nary_kernel::driver::{FileReport, Outcome};
use nary_kernel::Flags;

fn run(name: &str) -> FileReport {
    let mut s = prelude();
    s.check_source(&read(name)).unwrap()
}

#[test]
fn every_pragma_matches() {
    let base = prelude();
    for (name, src) in corpus() {
        let report = base.clone().check_source(&src).unwrap();
        assert!(report.all_expected(), "{name}:\n{}", report.render(Flags::default()));
    }
}

#[test]
fn unifier_suite_outcomes() {
    for name in UNIFIER_FILES {
        let report = run(name);
        assert_eq!(report.decls.len(), 1, "{name}");
        let expected = match name {
            "nary-unsolved.nry" => Outcome::Unsolved { metas: 2, constraints: 1 },
            "notinverted.nry" => Outcome::Unsolved { metas: 1, constraints: 1 },
            _ => Outcome::Ok,
        };
        assert_eq!(report.decls[0].outcome, expected, "{name}");
    }
}

#[test]
fn unsolved_report_lists_both_metas_and_the_constraint() {
    let report = run("nary-unsolved.nry");
    let d = &report.decls[0];
    assert_eq!(d.details.len(), 3);
    assert!(d.details[0].starts_with("unsolved meta ") && d.details[0].ends_with("(underscore) : Nat"));
    assert!(d.details[1].ends_with("(underscore) : Set"));
    assert!(d.details[2].contains("nary (") && d.details[2].ends_with("≈ Nat -> A"));
}

#[test]
fn inverted_arity_is_one() {
    let mut s = prelude();
    let before = s.tc.inversions.len();
    let report = s.check_source(&read("inverted.nry")).unwrap();
    assert_eq!(report.decls[0].outcome, Outcome::Ok);
    // Arity 1 is found in two steps: suc, then zero.
    let events = &s.tc.inversions[before..];
    assert_eq!(events.len(), 2);
    assert!(events.iter().all(|e| &*s.tc.globals.get(e.global).name == "nary"));
    assert_eq!((events[0].chosen, events[1].chosen), (1, 0));
}

#[test]
fn notinverted_does_not_invert() {
    let mut s = prelude();
    let before = s.tc.inversions.len();
    s.check_source(&read("notinverted.nry")).unwrap();
    assert_eq!(s.tc.inversions.len(), before);
}

#[test]
fn arity_declarations_need_no_arity() {
    let report = run("arity.nry");
    let checked: Vec<_> = report.decls.iter().filter(|d| !d.name.starts_with(char::is_uppercase)).collect();
    assert!(checked.len() >= 8);
    for d in checked {
        assert_eq!(d.outcome, Outcome::Ok, "{}", d.name);
    }
    for name in ["ex1", "ex2", "pi1", "pi2", "all1", "all2", "imp2", "cap2", "cup2", "neg2", "subst3"] {
        assert!(report.get(name).is_some(), "{name}");
    }
}

#[test]
fn reductions_hold_by_refl() {
    let report = run("reduction.nry");
    assert!(report.decls.len() > 25);
    for d in &report.decls {
        assert_eq!(d.outcome, Outcome::Ok, "{}", d.headline());
    }
}

#[test]
fn clause_errors_are_named() {
    let report = run("clause-errors.nry");
    let msg = |n: &str| match &report.get(n).unwrap().outcome {
        Outcome::TypeError(m) => m.clone(),
        o => panic!("{n}: {o:?}"),
    };
    assert!(msg("Sets'").starts_with("coverage error"));
    assert!(msg("sup'").starts_with("overlap error"));
    assert!(msg("plus'").starts_with("termination error"));
    assert!(msg("zipWith'").contains("missing case _ (cons _ _) nil"));
    assert!(msg("swap").starts_with("termination error"));
}

#[test]
fn normal_forms() {
    let mut s = prelude();
    s.check_source("two+three : Nat\ntwo+three = plus 2 3\nz : List Nat\nz = zipwithn 2 plus (cons 1 (cons 2 nil)) (cons 3 (cons 4 nil))\n")
        .unwrap();
    assert_eq!(s.normal_form("two+three").unwrap(), "5");
    assert_eq!(s.normal_form("z").unwrap(), "cons 4 (cons 6 nil)");
}

#[test]
fn trace_records_rules() {
    let mut s = nary_kernel::Session::with_prelude(nary_kernel::Options { trace: true, ..Default::default() }).unwrap();
    let report = s.check_source(&read("inverted.nry")).unwrap();
    let trace = &report.decls[0].trace;
    assert!(trace.iter().any(|l| l.starts_with("RULE invert | nary ?") && l.ends_with(":= (suc n)")), "{trace:#?}");
    assert!(trace.iter().any(|l| l.contains("clause 1 of nary")));
    let report = s.check_source(&read("unifproblem.nry")).unwrap();
    assert!(report.decls[0].trace.iter().any(|l| l.starts_with("RULE solve | ?")));
}

#[test]
fn validation_catches_a_corrupted_solution() {
    use nary_kernel::syntax::Term;
    use std::rc::Rc;
    let mut s = prelude();
    let clean = s.validate();
    assert!(clean.failures.is_empty(), "{:?}", clean.failures);
    s.check_source(&read("unifproblem.nry")).unwrap();
    let last = s.tc.metas.metas.iter().rposition(|m| m.solution.is_some()).unwrap();
    s.tc.metas.metas[last].solution = Some(Rc::new(Term::Zero));
    assert!(!s.validate().failures.is_empty());
}
