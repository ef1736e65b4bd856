#![allow(dead_code)]

use std::path::PathBuf;

use nary_kernel::{Options, Session};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Every corpus file as (file name, contents), sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "nry"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

pub fn prelude() -> Session {
    Session::with_prelude(Options::default()).unwrap()
}

pub const UNIFIER_FILES: [&str; 9] = [
    "unifproblem.nry",
    "sharedunifproblem.nry",
    "instantiation.nry",
    "unifconstr.nry",
    "nary-unsolved.nry",
    "normalised1.nry",
    "normalised0.nry",
    "inverted.nry",
    "notinverted.nry",
];
