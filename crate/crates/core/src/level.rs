//! Universe levels in canonical form.
//!
//! A level is kept as the maximum of a set of atoms `h + k` (a head `h`
//! raised by `k` successors) together with a closed constant. Two canonical
//! forms denote the same level exactly when they contain the same atoms and
//! the same constant, so definitional equality of levels is a set
//! comparison.
//!
//! The algebra is generic over the head type so it can be exercised on its
//! own; the checker instantiates it with neutral values.

use std::fmt;

/// A head raised by `offset` successors.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelAtom<H> {
    pub head: H,
    pub offset: u32,
}

/// `max(constant, atom_1, ..., atom_n)` in canonical form.
///
/// Invariants: no two atoms share a head, and the constant is strictly
/// greater than every atom offset or else it is zero.
#[derive(Clone, Debug)]
pub struct LevelNF<H> {
    constant: u32,
    atoms: Vec<LevelAtom<H>>,
}

impl<H: PartialEq> PartialEq for LevelNF<H> {
    fn eq(&self, other: &Self) -> bool {
        self.constant == other.constant
            && self.atoms.len() == other.atoms.len()
            && self.atoms.iter().all(|a| other.atoms.contains(a))
    }
}

impl<H: Clone + PartialEq> LevelNF<H> {
    pub fn zero() -> Self {
        LevelNF { constant: 0, atoms: Vec::new() }
    }

    pub fn constant(k: u32) -> Self {
        LevelNF { constant: k, atoms: Vec::new() }
    }

    pub fn atom(head: H) -> Self {
        Self::atom_plus(head, 0)
    }

    pub fn atom_plus(head: H, offset: u32) -> Self {
        LevelNF { constant: 0, atoms: vec![LevelAtom { head, offset }] }
    }

    /// Builds a canonical form from arbitrary parts.
    pub fn from_parts(constant: u32, atoms: impl IntoIterator<Item = LevelAtom<H>>) -> Self {
        let mut nf = LevelNF { constant, atoms: Vec::new() };
        for atom in atoms {
            nf.insert(atom);
        }
        nf.canonicalize();
        nf
    }

    fn insert(&mut self, atom: LevelAtom<H>) {
        match self.atoms.iter_mut().find(|a| a.head == atom.head) {
            Some(existing) => existing.offset = existing.offset.max(atom.offset),
            None => self.atoms.push(atom),
        }
    }

    fn canonicalize(&mut self) {
        if self.atoms.iter().any(|a| a.offset >= self.constant) {
            self.constant = 0;
        }
    }

    pub fn closed_constant(&self) -> u32 {
        self.constant
    }

    pub fn atoms(&self) -> &[LevelAtom<H>] {
        &self.atoms
    }

    pub fn is_closed(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The single atom of a form like `h + k` (with no surviving constant).
    pub fn single_atom(&self) -> Option<&LevelAtom<H>> {
        match self.atoms.as_slice() {
            [atom] if self.constant == 0 => Some(atom),
            _ => None,
        }
    }

    pub fn suc(&self) -> Self {
        LevelNF {
            constant: if self.atoms.is_empty() || self.constant > 0 { self.constant + 1 } else { 0 },
            atoms: self
                .atoms
                .iter()
                .map(|a| LevelAtom { head: a.head.clone(), offset: a.offset + 1 })
                .collect(),
        }
    }

    pub fn suc_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.suc())
    }

    pub fn max(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant = out.constant.max(other.constant);
        for atom in &other.atoms {
            out.insert(atom.clone());
        }
        out.canonicalize();
        out
    }

    /// Subtracts `k` successors, if that is possible without going below zero
    /// anywhere.
    pub fn pred_n(&self, k: u32) -> Option<Self> {
        if self.atoms.is_empty() {
            return self.constant.checked_sub(k).map(Self::constant);
        }
        if self.atoms.iter().any(|a| a.offset < k) {
            return None;
        }
        Some(LevelNF {
            constant: self.constant.saturating_sub(k),
            atoms: self
                .atoms
                .iter()
                .map(|a| LevelAtom { head: a.head.clone(), offset: a.offset - k })
                .collect(),
        })
    }

    pub fn map_heads<G: Clone + PartialEq>(&self, mut f: impl FnMut(&H) -> G) -> LevelNF<G> {
        LevelNF::from_parts(
            self.constant,
            self.atoms.iter().map(|a| LevelAtom { head: f(&a.head), offset: a.offset }),
        )
    }

    /// Replaces every atom by the level it stands for, returned by `f`.
    pub fn substitute(&self, mut f: impl FnMut(&H) -> LevelNF<H>) -> Self {
        self.atoms
            .iter()
            .fold(Self::constant(self.constant), |acc, a| acc.max(&f(&a.head).suc_n(a.offset)))
    }
}

/// Definitional level equality on canonical forms.
pub fn nf_equal<H: PartialEq>(x: &LevelNF<H>, y: &LevelNF<H>) -> bool {
    x == y
}

pub fn nf_max<H: Clone + PartialEq>(x: &LevelNF<H>, y: &LevelNF<H>) -> LevelNF<H> {
    x.max(y)
}

pub fn nf_suc<H: Clone + PartialEq>(x: &LevelNF<H>) -> LevelNF<H> {
    x.suc()
}

impl<H: fmt::Display> fmt::Display for LevelNF<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> =
            self.atoms.iter().map(|a| if a.offset == 0 { a.head.to_string() } else { format!("{}+{}", a.head, a.offset) }).collect();
        if self.constant > 0 || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// What the level solver needs to know about a head.
pub trait LevelHead: Clone + PartialEq {
    type Meta: Copy + PartialEq;

    /// The unsolved metavariable at the head, if this atom is flexible.
    fn flex_meta(&self) -> Option<Self::Meta>;

    fn mentions_meta(&self, meta: Self::Meta) -> bool;

    /// True when the head contains no unsolved metavariables at all.
    fn is_rigid(&self) -> bool;
}

#[derive(Clone, Debug, PartialEq)]
pub enum LevelSolution<H> {
    /// Each pair assigns the flexible head on the left the level on the right.
    Solved(Vec<(H, LevelNF<H>)>),
    Postponed,
    Failed,
}

/// Solves `lhs = rhs` inside the single-metavariable fragment.
///
/// `in_scope` decides whether a rigid head may appear in a solution.
pub fn solve_level<H: LevelHead>(
    lhs: &LevelNF<H>,
    rhs: &LevelNF<H>,
    in_scope: impl Fn(&H) -> bool,
) -> LevelSolution<H> {
    if lhs == rhs {
        return LevelSolution::Solved(Vec::new());
    }
    let rigid = |nf: &LevelNF<H>| nf.atoms.iter().all(|a| a.head.is_rigid());
    for (flex, other) in [(lhs, rhs), (rhs, lhs)] {
        let Some(atom) = flex.single_atom() else { continue };
        let Some(meta) = atom.head.flex_meta() else { continue };
        if other.atoms.iter().any(|a| a.head.mentions_meta(meta)) {
            return LevelSolution::Postponed;
        }
        return match other.pred_n(atom.offset) {
            Some(value) if value.atoms.iter().all(|a| in_scope(&a.head)) => {
                LevelSolution::Solved(vec![(atom.head.clone(), value)])
            }
            _ if rigid(other) => LevelSolution::Failed,
            _ => LevelSolution::Postponed,
        };
    }
    if rigid(lhs) && rigid(rhs) {
        LevelSolution::Failed
    } else {
        LevelSolution::Postponed
    }
}
