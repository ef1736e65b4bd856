//! Runs the nine unifier test files from the corpus and prints each report.

use nary_kernel::{Flags, Options, Session};

const FILES: [&str; 9] = [
    "unifproblem",
    "sharedunifproblem",
    "instantiation",
    "unifconstr",
    "nary-unsolved",
    "normalised1",
    "normalised0",
    "inverted",
    "notinverted",
];

fn main() {
    let base = Session::with_prelude(Options::default()).expect("prelude checks");
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    for name in FILES {
        let src = std::fs::read_to_string(dir.join(format!("{name}.nry"))).unwrap();
        let report = base.clone().check_source(&src).unwrap();
        println!("-- {name}");
        print!("{}", report.render(Flags::default()));
    }
}
