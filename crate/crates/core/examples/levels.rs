//! The level algebra on its own, with characters as level variables.

use nary_kernel::level::LevelNF;

fn main() {
    let a = LevelNF::atom('a');
    let b = LevelNF::atom('b');
    let zero = LevelNF::zero();
    println!("lsuc (a ⊔ lzero)      = {}", a.max(&zero).suc());
    println!("a ⊔ lsuc a            = {}", a.max(&a.suc()));
    println!("lsuc (a ⊔ b)          = {}", a.max(&b).suc());
    println!("2 ⊔ (a + 1)           = {}", LevelNF::constant(2).max(&LevelNF::atom_plus('a', 1)));
    println!("1 ⊔ (a + 1)           = {}", LevelNF::constant(1).max(&LevelNF::atom_plus('a', 1)));
    println!("(b ⊔ a) == (a ⊔ b)    = {}", b.max(&a) == a.max(&b));
    println!("pred 2 of (a+3 ⊔ 5)   = {:?}", LevelNF::constant(5).max(&LevelNF::atom_plus('a', 3)).pred_n(2).map(|l| l.to_string()));
}
