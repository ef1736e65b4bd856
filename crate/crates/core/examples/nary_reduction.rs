//! Normal forms of n-ary programs built from the prelude.

use nary_kernel::{Options, Session};

const SRC: &str = r#"
plus3 : Nat -> Nat -> Nat -> Nat
plus3 x y z = plus x (plus y z)

sums : List Nat
sums = zipwithn 3 plus3 (cons 1 (cons 2 nil)) (cons 10 (cons 20 nil)) (cons 100 (cons 200 nil))

curried : Nat
curried = curryn 3 (uncurryn 3 plus3) 1 2 3

later : Nat -> Nat
later = mapn 1 (\g. g 5) plus

arrows : Set
arrows = Arrows 3 (Nat , (List Nat , (Nat , lift tt))) Nat

proof : Id Nat 5 5
proof = congn 2 plus {2} {2} refl {3} {3} refl
"#;

fn main() {
    let mut s = Session::with_prelude(Options::default()).unwrap();
    let report = s.check_source(SRC).unwrap();
    assert!(report.all_expected());
    for name in ["sums", "curried", "later", "arrows", "proof"] {
        println!("{name} = {}", s.normal_form(name).unwrap());
    }
}
