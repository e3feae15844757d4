//! Two-component semiorthogonal decompositions of `D^b(X)` as labels.
//!
//! The family is `⟨O_C(k), f^L_{k+1} D^b(Y)⟩` and `⟨f^L_k D^b(Y), O_C(k)⟩`
//! with `f^L_k(G) = f*G ⊗ O(−kC)`.
//!
//! For `⟨D₁, D₂⟩` the left mutation is `⟨S(D₂), D₁⟩` and the right mutation
//! is `⟨D₂, S⁻¹(D₁)⟩`, where `S = ⊗K_X[2]`. Since `K_X = f*K_Y + C`,
//! `O(C)|_C = O_C(−1)` and `f*K_Y` is trivial near `C`, the Serre functor
//! sends `O_C(k)` to `O_C(k−1)` (up to shift) and `f^L_{k+1} D^b(Y)` to
//! `f^L_k D^b(Y)`. This gives
//!
//! * left `⟨O_C(k), f^L_{k+1}⟩ = ⟨f^L_k, O_C(k)⟩`,
//! * right `⟨O_C(k), f^L_{k+1}⟩ = ⟨f^L_{k+1}, O_C(k+1)⟩`,
//! * left `⟨f^L_k, O_C(k)⟩ = ⟨O_C(k−1), f^L_k⟩`,
//! * right `⟨f^L_k, O_C(k)⟩ = ⟨O_C(k), f^L_{k+1}⟩`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    /// `⟨O_C(k), f^L_{k+1} D^b(Y)⟩`.
    ExcLeft,
    /// `⟨f^L_k D^b(Y), O_C(k)⟩`.
    ExcRight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SodLabel {
    pub orientation: Orientation,
    pub k: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationDir {
    Left,
    Right,
}

fn curve(k: i64) -> String {
    if k == 0 {
        "O_C".into()
    } else {
        format!("O_C({k})")
    }
}

fn pulled(k: i64) -> String {
    if k == 0 {
        "D^b(Y)".into()
    } else if k < 0 {
        format!("f^L_{{{k}}} D^b(Y)")
    } else {
        format!("f^L_{k} D^b(Y)")
    }
}

impl SodLabel {
    pub fn exc_left(k: i64) -> Self {
        Self { orientation: Orientation::ExcLeft, k }
    }

    pub fn exc_right(k: i64) -> Self {
        Self { orientation: Orientation::ExcRight, k }
    }

    pub fn render(&self) -> String {
        match self.orientation {
            Orientation::ExcLeft => format!("⟨{}, {}⟩", curve(self.k), pulled(self.k + 1)),
            Orientation::ExcRight => format!("⟨{}, {}⟩", pulled(self.k), curve(self.k)),
        }
    }
}

impl fmt::Display for SodLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn mutate(sod: SodLabel, dir: MutationDir) -> SodLabel {
    use MutationDir::*;
    use Orientation::*;
    match (sod.orientation, dir) {
        (ExcLeft, Left) => SodLabel::exc_right(sod.k),
        (ExcLeft, Right) => SodLabel::exc_right(sod.k + 1),
        (ExcRight, Left) => SodLabel::exc_left(sod.k - 1),
        (ExcRight, Right) => SodLabel::exc_left(sod.k),
    }
}

/// `R(n)` glues `f^L_n D^b(Y)` with `⟨O_C(n)⟩`; `L(k)` glues `⟨O_C(k)⟩` with `f^L_{k+1} D^b(Y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecollementLabel {
    R(i64),
    L(i64),
}

impl RecollementLabel {
    /// Functor names `(i, j)` of the two embeddings.
    pub fn functors(&self) -> (String, String) {
        match self {
            RecollementLabel::R(n) => (format!("f^L_{n}"), format!("ρ_{n}")),
            RecollementLabel::L(k) => ("j".into(), format!("f^L_{}", k + 1)),
        }
    }

    /// Lower recollement; `L(k)` is the lower recollement of `R(k+1)`.
    pub fn lower(&self) -> Self {
        match *self {
            RecollementLabel::R(n) => RecollementLabel::L(n - 1),
            RecollementLabel::L(k) => RecollementLabel::R(k),
        }
    }

    /// Upper recollement, inverse of [`lower`](Self::lower).
    pub fn upper(&self) -> Self {
        match *self {
            RecollementLabel::R(n) => RecollementLabel::L(n),
            RecollementLabel::L(k) => RecollementLabel::R(k + 1),
        }
    }
}

pub fn recollement_of(sod: SodLabel) -> RecollementLabel {
    match sod.orientation {
        Orientation::ExcRight => RecollementLabel::R(sod.k),
        Orientation::ExcLeft => RecollementLabel::L(sod.k),
    }
}

/// Labels that `⊗O(C)` acts on.
pub trait TwistByOc: Sized {
    fn twist_by_oc(self) -> Self;

    fn twist_by_oc_n(self, n: i64) -> Self;
}

impl TwistByOc for SodLabel {
    fn twist_by_oc(self) -> Self {
        self.twist_by_oc_n(1)
    }

    fn twist_by_oc_n(self, n: i64) -> Self {
        SodLabel { orientation: self.orientation, k: self.k - n }
    }
}

impl TwistByOc for RecollementLabel {
    fn twist_by_oc(self) -> Self {
        self.twist_by_oc_n(1)
    }

    fn twist_by_oc_n(self, n: i64) -> Self {
        match self {
            RecollementLabel::R(m) => RecollementLabel::R(m - n),
            RecollementLabel::L(k) => RecollementLabel::L(k - n),
        }
    }
}

pub fn twist_by_oc<T: TwistByOc>(x: T) -> T {
    x.twist_by_oc()
}

/// Every label reachable from `start` by at most `depth` mutations.
pub fn mutation_orbit(start: SodLabel, depth: usize) -> Vec<SodLabel> {
    let mut seen = std::collections::BTreeSet::new();
    seen.insert(start);
    let mut frontier = vec![start];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in frontier {
            for d in [MutationDir::Left, MutationDir::Right] {
                let m = mutate(s, d);
                if seen.insert(m) {
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().collect()
}
