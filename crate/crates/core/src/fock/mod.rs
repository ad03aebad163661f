//! Truncated two-mode Fock space (the magnetic Laguerre basis) and the
//! operators built from its two ladder pairs a, b.

mod matrix;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use matrix::{
    pauli, spin_identity, spin_lincomb, spin_max_abs, spin_mul, Csr, OperatorMatrix, Spin2, Storage,
};

use crate::error::{domain, Error, Result};
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockIndex {
    pub n1: usize,
    pub n2: usize,
}

impl FockIndex {
    pub fn new(n1: usize, n2: usize) -> Self {
        FockIndex { n1, n2 }
    }

    pub fn level(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn swapped(&self) -> Self {
        FockIndex::new(self.n2, self.n1)
    }
}

/// States with n1 + n2 <= Nmax, ordered by shell n1 + n2 and then by n1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedBasis {
    nmax: usize,
}

impl TruncatedBasis {
    pub fn new(nmax: usize) -> Self {
        TruncatedBasis { nmax }
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn dim(&self) -> usize {
        (self.nmax + 1) * (self.nmax + 2) / 2
    }

    /// Number of states strictly below shell `l`.
    pub fn shell_start(l: usize) -> usize {
        l * (l + 1) / 2
    }

    pub fn shell_range(&self, l: usize) -> std::ops::Range<usize> {
        Self::shell_start(l)..Self::shell_start(l + 1)
    }

    pub fn index_of(&self, n: FockIndex) -> Option<usize> {
        (n.level() <= self.nmax).then(|| Self::shell_start(n.level()) + n.n1)
    }

    pub fn index(&self, i: usize) -> FockIndex {
        assert!(i < self.dim(), "index {i} outside basis of dim {}", self.dim());
        // largest l with l(l+1)/2 <= i
        let mut l = (((8 * i + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
        while Self::shell_start(l + 1) <= i {
            l += 1;
        }
        while Self::shell_start(l) > i {
            l -= 1;
        }
        let n1 = i - Self::shell_start(l);
        FockIndex::new(n1, l - n1)
    }

    pub fn iter(&self) -> impl Iterator<Item = FockIndex> + '_ {
        (0..=self.nmax).flat_map(|l| (0..=l).map(move |n1| FockIndex::new(n1, l - n1)))
    }

    /// Shell label n1 + n2 of every basis state.
    pub fn levels(&self) -> Vec<usize> {
        self.iter().map(|n| n.level()).collect()
    }
}

pub fn build_basis(nmax: usize) -> TruncatedBasis {
    TruncatedBasis::new(nmax)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    APlus,
    AMinus,
    BPlus,
    BMinus,
}

/// Ladder operator on the truncated basis; a raising step that leaves the
/// truncation is dropped.
pub fn ladder(basis: TruncatedBasis, which: Ladder) -> OperatorMatrix {
    let mut t = Vec::with_capacity(basis.dim());
    for (col, n) in basis.iter().enumerate() {
        let target = match which {
            Ladder::APlus => Some((FockIndex::new(n.n1 + 1, n.n2), n.n1 + 1)),
            Ladder::AMinus => (n.n1 > 0).then(|| (FockIndex::new(n.n1 - 1, n.n2), n.n1)),
            Ladder::BPlus => Some((FockIndex::new(n.n1, n.n2 + 1), n.n2 + 1)),
            Ladder::BMinus => (n.n2 > 0).then(|| (FockIndex::new(n.n1, n.n2 - 1), n.n2)),
        };
        if let Some((m, k)) = target {
            if let Some(row) = basis.index_of(m) {
                t.push((row, col, C64::new((k as f64).sqrt(), 0.0)));
            }
        }
    }
    OperatorMatrix::from_triplets(basis, 1, &t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derived {
    K1,
    K2,
    G1,
    G2,
    X1,
    X2,
    L3,
    HB,
    QB,
}

impl FromStr for Derived {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "K1" => Derived::K1,
            "K2" => Derived::K2,
            "G1" => Derived::G1,
            "G2" => Derived::G2,
            "X1" => Derived::X1,
            "X2" => Derived::X2,
            "L3" => Derived::L3,
            "H_B" | "HB" => Derived::HB,
            "Q_B" | "QB" => Derived::QB,
            other => return Err(Error::UnknownName(other.to_string())),
        })
    }
}

impl fmt::Display for Derived {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Derived::K1 => "K1",
            Derived::K2 => "K2",
            Derived::G1 => "G1",
            Derived::G2 => "G2",
            Derived::X1 => "X1",
            Derived::X2 => "X2",
            Derived::L3 => "L3",
            Derived::HB => "H_B",
            Derived::QB => "Q_B",
        };
        f.write_str(s)
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Operators of the Landau problem in the ladder representation (hbar = 1).
pub fn derived_operator(basis: TruncatedBasis, name: Derived, params: &ModelParams) -> OperatorMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = C64::new(0.0, 1.0);
    let ap = || ladder(basis, Ladder::APlus);
    let am = || ladder(basis, Ladder::AMinus);
    let bp = || ladder(basis, Ladder::BPlus);
    let bm = || ladder(basis, Ladder::BMinus);
    let diag = |f: &dyn Fn(FockIndex) -> f64| {
        let d: Vec<C64> = basis.iter().map(|n| re(f(n))).collect();
        OperatorMatrix::diagonal(basis, 1, &d).certified(0.0)
    };
    match name {
        // (a+ + a-)/sqrt2
        Derived::K1 => ap().lincomb(re(s), &am(), re(s)).certified(1e-15),
        // (a+ - a-)/(i sqrt2)
        Derived::K2 => ap().lincomb(-i * s, &am(), i * s).certified(1e-15),
        Derived::G1 => bp().lincomb(re(-s), &bm(), re(-s)).certified(1e-15),
        Derived::G2 => bp().lincomb(i * s, &bm(), -i * s).certified(1e-15),
        Derived::X1 => {
            let k2 = derived_operator(basis, Derived::K2, params);
            let g1 = derived_operator(basis, Derived::G1, params);
            k2.lincomb(re(params.ell_b), &g1, re(-params.ell_b)).certified(1e-14)
        }
        Derived::X2 => {
            let g2 = derived_operator(basis, Derived::G2, params);
            let k1 = derived_operator(basis, Derived::K1, params);
            g2.lincomb(re(params.ell_b), &k1, re(-params.ell_b)).certified(1e-14)
        }
        Derived::L3 => diag(&|n| n.n1 as f64 - n.n2 as f64),
        Derived::HB => diag(&|n| params.eps_b * (n.n1 as f64 + 0.5)),
        Derived::QB => diag(&|n| (n.level() + 2) as f64),
    }
}

/// Diagonal of Q_{B,xi}^{-1} = (Q_B + 2 xi)^{-1}.
pub fn q_inverse_diag(basis: TruncatedBasis, xi: f64) -> Vec<f64> {
    basis.iter().map(|n| 1.0 / (n.level() as f64 + 2.0 + 2.0 * xi)).collect()
}

/// Landau projection Pi_j: selects every (j, m) inside the truncation.
pub fn landau_projection(basis: TruncatedBasis, j: usize) -> Result<OperatorMatrix> {
    if j > basis.nmax() {
        return domain(format!("level {j} exceeds Nmax {}", basis.nmax()));
    }
    Ok(landau_projection_unchecked(basis, j))
}

pub(crate) fn landau_projection_unchecked(basis: TruncatedBasis, j: usize) -> OperatorMatrix {
    let d: Vec<C64> = basis
        .iter()
        .map(|n| re(if n.n1 == j { 1.0 } else { 0.0 }))
        .collect();
    OperatorMatrix::diagonal(basis, 1, &d).certified(0.0)
}

/// Antiunitary operator psi -> U conj(psi).
#[derive(Clone, Debug)]
pub struct AntiUnitaryRep {
    pub unitary_part: OperatorMatrix,
    pub conjugates: bool,
}

impl AntiUnitaryRep {
    /// Theta T Theta^-1 = U conj(T) U^dagger (or U T U^dagger when linear).
    pub fn conjugate_operator(&self, t: &OperatorMatrix) -> OperatorMatrix {
        let u = &self.unitary_part;
        let inner = if self.conjugates { t.conj() } else { t.clone() };
        u.matmul(&inner).matmul(&u.adjoint())
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        if self.conjugates {
            let c: Vec<C64> = v.iter().map(|z| z.conj()).collect();
            self.unitary_part.apply(&c)
        } else {
            self.unitary_part.apply(v)
        }
    }

    /// The operator obtained by applying the map twice.
    pub fn square(&self) -> OperatorMatrix {
        let u = &self.unitary_part;
        if self.conjugates {
            u.matmul(&u.conj())
        } else {
            u.matmul(u)
        }
    }

    /// +1 or -1 when the square is exactly +-identity, None otherwise.
    pub fn square_sign(&self) -> Option<i32> {
        let sq = self.square();
        let id = OperatorMatrix::identity(sq.basis(), sq.spin_dim());
        if sq.max_abs_diff(&id) <= 1e-12 {
            Some(1)
        } else if sq.max_abs_diff(&(-&id)) <= 1e-12 {
            Some(-1)
        } else {
            None
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        let u = &self.unitary_part;
        let id = OperatorMatrix::identity(u.basis(), u.spin_dim());
        u.adjoint().matmul(u).max_abs_diff(&id)
    }

    /// self followed by a linear map `l`: psi -> l U conj(psi).
    pub fn then_linear(&self, l: &OperatorMatrix) -> AntiUnitaryRep {
        AntiUnitaryRep {
            unitary_part: l.matmul(&self.unitary_part),
            conjugates: self.conjugates,
        }
    }

    /// Residual max |Theta T Theta^-1 - T| on the interior block.
    pub fn commutation_residual(&self, t: &OperatorMatrix, margin: usize) -> f64 {
        self.conjugate_operator(t)
            .interior_block(margin)
            .max_abs_diff(&t.interior_block(margin))
    }
}

/// Phase of complex conjugation on the ladder basis:
/// conj psi_(n1,n2) = (-i)^(n1+n2) psi_(n2,n1).
pub fn conjugation_phase(n: FockIndex) -> C64 {
    C64::new(0.0, -1.0).powu(n.level() as u32)
}

/// Flip F, complex conjugation C and Theta = F C on the basis.
pub fn flip_and_conjugation(basis: TruncatedBasis) -> (OperatorMatrix, AntiUnitaryRep, AntiUnitaryRep) {
    let mut f = Vec::with_capacity(basis.dim());
    let mut c = Vec::with_capacity(basis.dim());
    for (col, n) in basis.iter().enumerate() {
        let row = basis.index_of(n.swapped()).expect("swap stays in shell");
        let sign = if n.level() % 2 == 0 { 1.0 } else { -1.0 };
        f.push((row, col, re(sign)));
        c.push((row, col, conjugation_phase(n)));
    }
    let flip = OperatorMatrix::from_triplets(basis, 1, &f).certified(0.0);
    let conj = AntiUnitaryRep {
        unitary_part: OperatorMatrix::from_triplets(basis, 1, &c),
        conjugates: true,
    };
    let theta = conj.then_linear(&flip);
    (flip, conj, theta)
}

/// Tensor product with a 2x2 spin matrix.
pub fn tensor_with_spin(t: &OperatorMatrix, m: &Spin2) -> Result<OperatorMatrix> {
    t.tensor_spin(m)
}

/// Restriction of `t` to the states with n1 + n2 <= Nmax - margin.
pub fn interior_block(t: &OperatorMatrix, margin: usize) -> Result<OperatorMatrix> {
    if margin > t.basis().nmax() {
        return domain(format!("margin {margin} exceeds Nmax {}", t.basis().nmax()));
    }
    Ok(t.interior_block(margin))
}
