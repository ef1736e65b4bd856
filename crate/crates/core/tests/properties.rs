use nary_kernel::level::{LevelAtom, LevelNF};
use nary_kernel::parse::{parse_expr, parse_file};
use nary_kernel::surface::print_decls;
use proptest::prelude::*;

type L = LevelNF<char>;

const HEADS: [char; 3] = ['a', 'b', 'c'];

/// Every level of the form `h + k` or the constant `k`, for the three heads and
/// offsets up to 3.
fn basic_levels() -> Vec<L> {
    let mut out = Vec::new();
    for k in 0..=3 {
        out.push(L::constant(k));
        for h in HEADS {
            out.push(L::atom_plus(h, k));
        }
    }
    out
}

/// The value of a canonical level under an assignment of the heads.
fn eval(l: &L, env: &[u32; 3]) -> u32 {
    let head = |h: char| env[HEADS.iter().position(|&x| x == h).unwrap()];
    l.atoms().iter().map(|a| head(a.head) + a.offset).fold(l.closed_constant(), u32::max)
}

fn assignments(bound: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=bound {
        for b in 0..=bound {
            for c in 0..=bound {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn semantically_equal(x: &L, y: &L, envs: &[[u32; 3]]) -> bool {
    envs.iter().all(|e| eval(x, e) == eval(y, e))
}

#[test]
fn exhaustive_lattice_laws() {
    let levels = basic_levels();
    let mut instances = 0usize;
    for x in &levels {
        for y in &levels {
            for z in &levels {
                assert_eq!(x.max(y), y.max(x), "commutativity {x} {y}");
                assert_eq!(x.max(&y.max(z)), x.max(y).max(z), "associativity {x} {y} {z}");
                assert_eq!(x.max(y).suc(), x.suc().max(&y.suc()), "suc distributes {x} {y}");
                assert_eq!(x.max(&y.max(z)).max(x), x.max(&y.max(z)), "absorption {x} {y} {z}");
                instances += 1;
            }
        }
        assert_eq!(x.max(x), *x, "idempotence {x}");
        assert_eq!(x.max(&L::zero()), *x, "unit {x}");
        assert_eq!(x.max(&x.suc()), x.suc(), "subsumption {x}");
    }
    assert!(instances >= 4000, "only {instances} instances");
}

#[test]
fn canonical_forms_agree_with_semantics() {
    // Offsets stay below 8 after one successor, so heads ranging over 0..=8
    // separate every pair of distinct forms built here.
    let envs = assignments(8);
    let levels = basic_levels();
    let mut forms: Vec<L> = Vec::new();
    for x in &levels {
        for y in &levels {
            forms.push(x.max(y));
            forms.push(x.max(y).suc());
        }
    }
    for x in &forms {
        for y in forms.iter().step_by(7) {
            assert_eq!(x == y, semantically_equal(x, y, &envs), "{x} vs {y}");
        }
    }
}

#[test]
fn suc_of_max_with_zero() {
    let a = L::atom('a');
    assert_eq!(a.max(&L::zero()).suc(), a.suc());
    assert_eq!(a.max(&L::zero()).suc().to_string(), a.suc().to_string());
}

#[test]
fn constants_are_absorbed_by_larger_atoms() {
    let nf = L::from_parts(2, [LevelAtom { head: 'a', offset: 3 }]);
    assert_eq!(nf, L::atom_plus('a', 3));
    let kept = L::from_parts(5, [LevelAtom { head: 'a', offset: 1 }]);
    assert_eq!(kept.closed_constant(), 5);
}

#[derive(Clone, Debug)]
enum Lv {
    Zero,
    Head(usize),
    Suc(Box<Lv>),
    Max(Box<Lv>, Box<Lv>),
}

fn lv() -> impl Strategy<Value = Lv> {
    let leaf = prop_oneof![Just(Lv::Zero), (0..3usize).prop_map(Lv::Head)];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|l| Lv::Suc(Box::new(l))),
            (inner.clone(), inner).prop_map(|(a, b)| Lv::Max(Box::new(a), Box::new(b))),
        ]
    })
}

fn normalize(l: &Lv) -> L {
    match l {
        Lv::Zero => L::zero(),
        Lv::Head(i) => L::atom(HEADS[*i]),
        Lv::Suc(a) => normalize(a).suc(),
        Lv::Max(a, b) => normalize(a).max(&normalize(b)),
    }
}

fn direct(l: &Lv, env: &[u32; 3]) -> u32 {
    match l {
        Lv::Zero => 0,
        Lv::Head(i) => env[*i],
        Lv::Suc(a) => direct(a, env) + 1,
        Lv::Max(a, b) => direct(a, env).max(direct(b, env)),
    }
}

proptest! {
    #[test]
    fn normal_form_preserves_meaning(l in lv(), env in prop::array::uniform3(0u32..6)) {
        prop_assert_eq!(eval(&normalize(&l), &env), direct(&l, &env));
    }

    #[test]
    fn pred_inverts_suc(l in lv(), k in 0u32..4) {
        let n = normalize(&l);
        prop_assert_eq!(n.suc_n(k).pred_n(k), Some(n));
    }

    #[test]
    fn semantic_equality_is_canonical(a in lv(), b in lv()) {
        let (x, y) = (normalize(&a), normalize(&b));
        // Expression depth 5 keeps offsets at most 5.
        let envs = assignments(6);
        prop_assert_eq!(x == y, semantically_equal(&x, &y, &envs));
    }
}

// Printing then parsing an expression gives back the same tree.

fn ident() -> impl Strategy<Value = String> {
    prop_oneof![Just("x"), Just("y"), Just("Nat"), Just("plus"), Just("Set"), Just("suc"), Just("zero")]
        .prop_map(String::from)
}

fn expr_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![ident(), (0u64..4).prop_map(|n| n.to_string()), Just("_".to_string())];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, a)| format!("({f} {a})")),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| format!("({f} {{{a}}})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} -> {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("((x : {a}) -> {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({{y : {a}}} -> {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} , {b})")),
            inner.clone().prop_map(|b| format!("(\\x {{y}}. {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("(let x = {a} in {b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a} : {b})")),
        ]
    })
}

proptest! {
    #[test]
    fn expression_round_trip(src in expr_src()) {
        let e = parse_expr(&src).unwrap();
        let printed = e.to_string();
        let back = parse_expr(&printed).unwrap();
        prop_assert_eq!(e.erase_spans(), back.erase_spans(), "printed as {}", printed);
    }

    #[test]
    fn declaration_round_trip(ty in expr_src(), rhs in expr_src()) {
        let src = format!("#expect ok\nf : {ty}\nf x (suc n) {{y}} = {rhs}\n");
        let decls = parse_file(&src).unwrap();
        let back = parse_file(&print_decls(&decls)).unwrap();
        let erase = |ds: &[nary_kernel::surface::Decl]| ds.iter().map(|d| d.erase_spans()).collect::<Vec<_>>();
        prop_assert_eq!(erase(&decls), erase(&back));
    }
}
