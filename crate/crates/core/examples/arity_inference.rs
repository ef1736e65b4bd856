//! Quantifiers and pointwise combinators applied without an arity. The
//! arity is recovered by inverting `Arrows`, and the solved metas show it.

use nary_kernel::{Flags, Options, Session};

const SRC: &str = r#"
postulate Even : Nat -> Set
postulate Le : Nat -> Nat -> Set

total : Set
total = Foralls (imp Le (neg (neg Le)))

witness : Set
witness = Exists (cap Even Even)

_ : Id Set witness ((x : Nat) * (Even x * Even x))
_ = refl
"#;

fn main() {
    let mut s = Session::with_prelude(Options::default()).unwrap();
    let report = s.check_source(SRC).unwrap();
    print!("{}", report.render(Flags::default()));
    println!("total = {}", s.normal_form("total").unwrap());
    println!("witness = {}", s.normal_form("witness").unwrap());
}
