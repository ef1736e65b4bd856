//! Coverage, overlap and termination errors from the clause checker.

use nary_kernel::{Flags, Options, Session};

const SRC: &str = r#"
#expect typeerror
half : Nat -> Nat
half zero = zero
half (suc (suc n)) = suc (half n)

#expect typeerror
pick : Nat -> Nat -> Nat
pick zero n = n
pick m zero = m
pick (suc m) (suc n) = pick m n

#expect typeerror
loop : Nat -> Nat
loop zero = zero
loop (suc n) = loop (suc n)

len : List Nat -> Nat
len nil = 0
len (cons x xs) = suc (len xs)
"#;

fn main() {
    let report = Session::new(Options::default()).check_source(SRC).unwrap();
    print!("{}", report.render(Flags::default()));
}
