//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{corpus, prelude, read, UNIFIER_FILES};
use nary_kernel::driver::{inversion_alternatives, Outcome};
use nary_kernel::level::LevelNF;
use nary_kernel::parse::parse_file;
use nary_kernel::surface::print_decls;
use nary_kernel::{Flags, Options, Session, PRELUDE};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

const TIME_LIMIT: Duration = Duration::from_secs(1);

fn fidelity() -> Verdict {
    let start = Instant::now();
    let base = prelude();
    let mut failures = Vec::new();
    for name in UNIFIER_FILES {
        let report = base.clone().check_source(&read(name)).map_err(|e| format!("{name}: {e}"))?;
        let want = match name {
            "nary-unsolved.nry" => Some(Outcome::Unsolved { metas: 2, constraints: 1 }),
            "notinverted.nry" => None,
            _ => Some(Outcome::Ok),
        };
        for d in &report.decls {
            let good = match &want {
                Some(o) => d.outcome == *o,
                None => matches!(d.outcome, Outcome::Unsolved { .. }),
            };
            if !good || !d.matches() {
                failures.push(format!("{name}: {}", d.headline()));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= TIME_LIMIT {
        failures.push(format!("took {elapsed:?}"));
    }
    if failures.is_empty() {
        Ok(format!("9 files as reported, {} ms including the prelude", elapsed.as_millis()))
    } else {
        Err(failures.join("; "))
    }
}

fn arity() -> Verdict {
    let report = prelude().check_source(&read("arity.nry")).map_err(|e| e.to_string())?;
    let combinators = ["Exists", "Pis", "Foralls", "imp", "cap", "cup", "neg", "substn"];
    let src = read("arity.nry");
    let mut used = Vec::new();
    for c in combinators {
        // No combinator is ever given an arity.
        let applied_to_number = src.lines().any(|l| {
            let mut words = l.split_whitespace().peekable();
            while let Some(w) = words.next() {
                if w == c && words.peek().is_some_and(|n| n.parse::<u64>().is_ok()) {
                    return true;
                }
            }
            false
        });
        if applied_to_number {
            return Err(format!("{c} is given an explicit arity"));
        }
        if src.lines().any(|l| l.split_whitespace().any(|w| w == c)) {
            used.push(c);
        }
    }
    if used.len() != combinators.len() {
        return Err(format!("only {used:?} exercised"));
    }
    let checked: Vec<_> = report.decls.iter().filter(|d| !d.name.starts_with(char::is_uppercase)).collect();
    let bad: Vec<String> = report.decls.iter().filter(|d| d.outcome != Outcome::Ok).map(|d| d.headline()).collect();
    if checked.len() < 8 || !bad.is_empty() {
        return Err(format!("{} declarations, failing: {}", checked.len(), bad.join("; ")));
    }
    Ok(format!("{} declarations, all ok with no arity given", checked.len()))
}

fn reduction() -> Verdict {
    let report = prelude().check_source(&read("reduction.nry")).map_err(|e| e.to_string())?;
    let required = [
        "arrows0", "arrows2", "sup0", "sup2", "uncurry2", "roundtrip2", "uncurry3", "roundtrip3", "congn2", "zip2", "zip2'",
        "alltype", "mapn2", "mapn1",
    ];
    for r in required {
        match report.get(r) {
            Some(d) if d.outcome == Outcome::Ok => {}
            Some(d) => return Err(d.headline()),
            None => return Err(format!("{r} missing")),
        }
    }
    let bad: Vec<String> = report.decls.iter().filter(|d| d.outcome != Outcome::Ok).map(|d| d.headline()).collect();
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    Ok(format!("{} equalities hold by refl", report.decls.len()))
}

fn validation() -> Verdict {
    let base = prelude();
    let (mut constraints, mut metas) = (0, 0);
    let mut failures = Vec::new();
    for (name, src) in corpus() {
        let mut s = base.clone();
        s.check_source(&src).map_err(|e| format!("{name}: {e}"))?;
        let v = s.validate();
        constraints += v.constraints;
        metas += v.metas;
        failures.extend(v.failures.into_iter().map(|f| format!("{name}: {f}")));
    }
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    if constraints == 0 || metas == 0 {
        return Err("nothing was validated".into());
    }
    Ok(format!("{constraints} solved constraints and {metas} solved metas re-verified"))
}

fn levels() -> Verdict {
    type L = LevelNF<char>;
    let mut basic = Vec::new();
    for k in 0..=3 {
        basic.push(L::constant(k));
        for h in ['a', 'b', 'c'] {
            basic.push(L::atom_plus(h, k));
        }
    }
    let mut instances = 0;
    for x in &basic {
        for y in &basic {
            for z in &basic {
                let laws = [
                    x.max(y) == y.max(x),
                    x.max(&y.max(z)) == x.max(y).max(z),
                    x.max(x) == *x,
                    x.max(y).suc() == x.suc().max(&y.suc()),
                    x.max(&x.suc()) == x.suc(),
                    x.max(&L::zero()) == *x,
                ];
                if let Some(i) = laws.iter().position(|ok| !ok) {
                    return Err(format!("law {i} fails at {x}, {y}, {z}"));
                }
                instances += 1;
            }
        }
    }
    let a = L::atom('a');
    if a.max(&L::zero()).suc() != a.suc() {
        return Err("lsuc (a ⊔ lzero) differs from lsuc a".into());
    }
    if instances < 4000 {
        return Err(format!("only {instances} instances"));
    }
    Ok(format!("{instances} instances, lsuc (a ⊔ lzero) = lsuc a"))
}

fn inversion() -> Verdict {
    let base = prelude();
    let (mut events, mut runs) = (std::collections::BTreeSet::new(), 0);
    for (name, src) in corpus() {
        for run in inversion_alternatives(&base, &src).map_err(|e| format!("{name}: {e}"))? {
            events.insert((name.clone(), run.event));
            runs += 1;
            if !matches!(run.outcome, Outcome::TypeError(_)) {
                return Err(format!(
                    "{name}: forcing clause {} of {} instead of {} in {} gave {:?}",
                    run.alternative + 1,
                    run.global,
                    run.chosen + 1,
                    run.decl,
                    run.outcome
                ));
            }
        }
    }
    if events.is_empty() {
        return Err("no inversion fired".into());
    }
    Ok(format!("{} inversions, all {runs} alternative clauses fail", events.len()))
}

fn mutated(from: &str, to: &str) -> String {
    assert!(PRELUDE.contains(from), "{from}");
    PRELUDE.replacen(from, to, 1)
}

fn robustness() -> Verdict {
    let mutants = [
        ("Sets", mutated("Sets (suc n) ls = Set (fst ls) * Sets n (snd ls)\n", ""), "coverage error"),
        (
            "sup",
            mutated("sup (suc n) ls = lmax (fst ls) (sup n (snd ls))\n", "sup (suc n) ls = lmax (fst ls) (sup n (snd ls))\nsup m ls = lzero\n"),
            "overlap error",
        ),
        ("plus", mutated("plus (suc m) n = suc (plus m n)", "plus (suc m) n = suc (plus (suc m) n)"), "termination error"),
    ];
    for (name, src, error) in &mutants {
        let report = Session::new(Options::default()).check_source(src).map_err(|e| e.to_string())?;
        match report.get(name).map(|d| &d.outcome) {
            Some(Outcome::TypeError(msg)) if msg.starts_with(error) => {}
            other => return Err(format!("mutated {name}: expected {error}, got {other:?}")),
        }
    }

    let mut files = corpus();
    files.push(("prelude".into(), PRELUDE.into()));
    for (name, src) in &files {
        let decls = parse_file(src).map_err(|e| format!("{name}: {e}"))?;
        let printed = print_decls(&decls);
        let back = parse_file(&printed).map_err(|e| format!("{name} reprinted: {e}"))?;
        let erase = |ds: &[nary_kernel::surface::Decl]| ds.iter().map(|d| d.erase_spans()).collect::<Vec<_>>();
        if erase(&decls) != erase(&back) || print_decls(&back) != printed {
            return Err(format!("{name} does not round-trip"));
        }
    }

    let render = || -> Result<String, String> {
        let options = Options { trace: true, ..Default::default() };
        let base = Session::with_prelude(options)?;
        let flags = Flags { trace_unify: true, print_metas: true };
        let mut out = String::new();
        for (name, src) in corpus() {
            let report = base.clone().check_source(&src).map_err(|e| format!("{name}: {e}"))?;
            out.push_str(&report.render(flags));
        }
        Ok(out)
    };
    let (first, second) = (render()?, render()?);
    if first != second {
        return Err("reports differ between runs".into());
    }
    Ok(format!(
        "3 mutants rejected, {} files round-trip, {} report bytes identical across runs",
        files.len(),
        first.len()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("unifier fidelity suite", fidelity),
        ("arity inference", arity),
        ("reduction oracle", reduction),
        ("validation pass", validation),
        ("level algebra laws", levels),
        ("inversion uniqueness", inversion),
        ("robustness", robustness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
