//! Unifier traces for an inverted and a non-inverted constraint.

use nary_kernel::{Flags, Options, Session};

fn main() {
    let options = Options { trace: true, ..Default::default() };
    let base = Session::with_prelude(options).unwrap();
    let flags = Flags { trace_unify: true, print_metas: true };
    for src in [
        "_ : Id Set (nary _ Nat) (Nat -> Nat)\n_ = refl\n",
        "#expect unsolved\n_ : Id Set (nary _ (Nat -> Nat)) (Nat -> Nat -> Nat)\n_ = refl\n",
    ] {
        print!("{}", base.clone().check_source(src).unwrap().render(flags));
        println!();
    }
}
