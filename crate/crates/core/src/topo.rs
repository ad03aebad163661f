//! Rank and Chern number of spectral projections through Dixmier traces,
//! symmetry-type classification and the curvature identities behind them.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fock::{
    derived_operator, flip_and_conjugation, landau_projection, spin_identity, AntiUnitaryRep, Derived, OperatorMatrix,
    TruncatedBasis,
};
use crate::models::{
    diagonalize, fermi_projection_from, jc_angles, jc_projection, quaternionic_hamiltonian, quaternionic_trs, jc_trs,
    Branch, DEFAULT_GAP,
};
use crate::params::ModelParams;
use crate::singtrace::{
    dixmier_graded_complex, dixmier_via_gamma_fit, DixmierEstimate, SingularSequence,
};

/// Margin for products of three first-order ladder factors.
pub const CURVATURE_MARGIN: usize = 3;
/// Commutation tolerance for symmetry certification.
pub const SYMMETRY_TOL: f64 = 1e-8;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// d_i T = -i [X_i, T], with X_i acting on the Fock factor.
pub fn partial_derivative(t: &OperatorMatrix, i: usize, params: &ModelParams) -> Result<OperatorMatrix> {
    let which = match i {
        1 => Derived::X1,
        2 => Derived::X2,
        _ => return domain(format!("direction must be 1 or 2, got {i}")),
    };
    let mut x = derived_operator(t.basis(), which, params);
    if t.spin_dim() == 2 {
        x = x.tensor_spin(&spin_identity())?;
    }
    Ok(x.commutator(t).scale(C64::new(0.0, -1.0)))
}

/// P [d_1 P, d_2 P].
pub fn curvature(p: &OperatorMatrix, params: &ModelParams) -> Result<OperatorMatrix> {
    let d1 = partial_derivative(p, 1, params)?;
    let d2 = partial_derivative(p, 2, params)?;
    Ok(p.matmul(&d1.commutator(&d2)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureResiduals {
    pub j: usize,
    /// max |[d1 Pi_j, d2 Pi_j] + i l^2 (Pi_j + j Pi_{j-1} - (j+1) Pi_{j+1})| / l^2.
    pub commutator: f64,
    /// Same with the coefficient (j - 1) on Pi_{j-1}; nonzero for j >= 1.
    pub commutator_shifted: f64,
    /// max |Pi_j [d1 Pi_j, d2 Pi_j] + i l^2 Pi_j| / l^2.
    pub curvature: f64,
}

pub fn verify_curvature_identity(j: usize, basis: TruncatedBasis, params: &ModelParams) -> Result<CurvatureResiduals> {
    params.validate()?;
    if j + CURVATURE_MARGIN > basis.nmax() {
        return domain(format!("level {j} needs Nmax >= {}", j + CURVATURE_MARGIN));
    }
    let l2 = params.ell_b * params.ell_b;
    let pj = landau_projection(basis, j)?;
    let d1 = partial_derivative(&pj, 1, params)?;
    let d2 = partial_derivative(&pj, 2, params)?;
    let comm = d1.commutator(&d2);
    let m = CURVATURE_MARGIN;
    let base = pj.lincomb(ONE, &landau_projection(basis, j + 1)?, C64::new(-(j as f64 + 1.0), 0.0));
    let residual = |coef: f64| -> Result<f64> {
        let mut want = base.clone();
        if j > 0 {
            want = want.lincomb(ONE, &landau_projection(basis, j - 1)?, C64::new(coef, 0.0));
        }
        let want = want.scale(C64::new(0.0, -l2));
        Ok(comm.interior_block(m).max_abs_diff(&want.interior_block(m)) / l2)
    };
    let commutator = residual(j as f64)?;
    let commutator_shifted = residual(j as f64 - 1.0)?;
    let r = pj.matmul(&comm);
    let curvature = r.interior_block(m).max_abs_diff(&pj.scale(C64::new(0.0, -l2)).interior_block(m)) / l2;
    Ok(CurvatureResiduals {
        j,
        commutator,
        commutator_shifted,
        curvature,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    /// Anti-unitary symmetry squaring to +1.
    Real,
    /// Anti-unitary symmetry squaring to -1.
    Quaternionic,
    None,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub class: SymmetryClass,
    /// Commutation residual of the deciding candidate, or the smallest one seen.
    pub residual: f64,
}

/// The first candidate commuting with `h` on the interior block decides the class.
pub fn classify_symmetry(h: &OperatorMatrix, candidates: &[AntiUnitaryRep]) -> SymmetryCheck {
    let mut best = f64::INFINITY;
    for c in candidates {
        if c.unitary_part.dim() != h.dim() {
            continue;
        }
        let r = c.commutation_residual(h, crate::singtrace::DEFAULT_MARGIN);
        if r <= SYMMETRY_TOL {
            let class = match c.square_sign() {
                Some(1) => SymmetryClass::Real,
                Some(-1) => SymmetryClass::Quaternionic,
                _ => continue,
            };
            return SymmetryCheck { class, residual: r };
        }
        best = best.min(r);
    }
    SymmetryCheck {
        class: SymmetryClass::None,
        residual: best,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rounded {
    pub value: i64,
    /// |estimate - value| <= 3 x residual.
    pub resolved: bool,
}

pub fn round_invariant(e: &DixmierEstimate) -> Rounded {
    let value = e.value.round();
    Rounded {
        value: value as i64,
        resolved: e.value.is_finite() && (e.value - value).abs() <= 3.0 * e.residual,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopologicalReport {
    pub rank_estimate: DixmierEstimate,
    pub chern_estimate: DixmierEstimate,
    pub rank_rounded: Rounded,
    pub chern_rounded: Rounded,
    pub symmetry: SymmetryCheck,
    /// Rank and Chern even when the symmetry is Quaternionic; true otherwise.
    pub parity_ok: bool,
    pub margin: usize,
    pub identity_residuals: BTreeMap<String, f64>,
}

impl TopologicalReport {
    pub fn resolved(&self) -> bool {
        self.rank_rounded.resolved && self.chern_rounded.resolved
    }
}

/// Rank TrDix(Q^-1 P) and Chern (i / l^2) TrDix(Q^-1 P [d1 P, d2 P]) of a
/// projection from the graded estimator.
pub fn invariants_of_projection(
    p: &OperatorMatrix,
    params: &ModelParams,
    margin: usize,
    tolerance: f64,
) -> Result<(DixmierEstimate, DixmierEstimate, BTreeMap<String, f64>)> {
    let l2 = params.ell_b * params.ell_b;
    let rank = dixmier_graded_complex(p, params.xi, tolerance, margin)?;
    let r = curvature(p, params)?;
    let c = dixmier_graded_complex(&r, params.xi, tolerance, margin)?;
    // (i / l^2)(a + i b) = (-b + i a) / l^2.
    let residual = c.re.residual.max(c.im.residual) / l2;
    let chern = DixmierEstimate {
        value: -c.im.value / l2,
        method: c.im.method,
        samples: c.im.samples.iter().map(|&(l, v)| (l, -v / l2)).collect(),
        converged: residual <= tolerance,
        residual,
    };
    let mut extra = BTreeMap::new();
    extra.insert("rank_imaginary".into(), rank.im.value.abs());
    extra.insert("chern_imaginary".into(), (c.re.value / l2).abs());
    Ok((rank.re, chern, extra))
}

fn assemble(
    rank: DixmierEstimate,
    chern: DixmierEstimate,
    symmetry: SymmetryCheck,
    margin: usize,
    identity_residuals: BTreeMap<String, f64>,
) -> TopologicalReport {
    let rank_rounded = round_invariant(&rank);
    let chern_rounded = round_invariant(&chern);
    let parity_ok = symmetry.class != SymmetryClass::Quaternionic
        || (rank_rounded.value % 2 == 0 && chern_rounded.value % 2 == 0);
    TopologicalReport {
        rank_estimate: rank,
        chern_estimate: chern,
        rank_rounded,
        chern_rounded,
        symmetry,
        parity_ok,
        margin,
        identity_residuals,
    }
}

/// Invariants of the Landau projection Pi_j.
pub fn invariants_landau(j: usize, basis: TruncatedBasis, params: &ModelParams, tolerance: f64) -> Result<TopologicalReport> {
    params.validate()?;
    if j + CURVATURE_MARGIN > basis.nmax() {
        return domain(format!("level {j} needs Nmax >= {}", j + CURVATURE_MARGIN));
    }
    let pj = landau_projection(basis, j)?;
    let (rank, chern, mut extra) = invariants_of_projection(&pj, params, CURVATURE_MARGIN, tolerance)?;
    let gamma = dixmier_via_gamma_fit(&SingularSequence::q_inverse_proj(params.xi, j), tolerance)?;
    extra.insert("rank_gamma_fit_difference".into(), (gamma.value - rank.value).abs());
    let c = verify_curvature_identity(j, basis, params)?;
    extra.insert("curvature_identity".into(), c.curvature);
    extra.insert("commutator_identity".into(), c.commutator);
    let theta = flip_and_conjugation(basis).2;
    let sym = classify_symmetry(&pj, &[theta]);
    Ok(assemble(rank, chern, sym, CURVATURE_MARGIN, extra))
}

/// Invariants of the JC projection P_j^+-.
pub fn invariants_jc(
    j: usize,
    branch: Branch,
    basis: TruncatedBasis,
    params: &ModelParams,
    tolerance: f64,
) -> Result<TopologicalReport> {
    params.validate()?;
    if j == 0 || j + 1 + CURVATURE_MARGIN > basis.nmax() {
        return domain(format!("JC level {j} needs j >= 1 and Nmax >= {}", j + 1 + CURVATURE_MARGIN));
    }
    let p = jc_projection(basis, params, j, branch)?;
    let (rank, chern, mut extra) = invariants_of_projection(&p, params, CURVATURE_MARGIN, tolerance)?;
    let (tp, tm) = jc_angles(j, params.c_b)?;
    let th = match branch {
        Branch::Plus => tp,
        Branch::Minus => tm,
    };
    let l2 = params.ell_b * params.ell_b;
    let traced = curvature(&p, params)?.spin_trace()?;
    let want = landau_projection(basis, j - 1)?
        .scale_re(th.sin().powi(2))
        .lincomb(ONE, &landau_projection(basis, j)?, C64::new(th.cos().powi(2), 0.0))
        .scale(C64::new(0.0, -l2));
    let m = CURVATURE_MARGIN;
    extra.insert(
        "spin_traced_curvature".into(),
        traced.interior_block(m).max_abs_diff(&want.interior_block(m)) / l2,
    );
    let sym = classify_symmetry(&p, &[jc_trs(basis)?]);
    Ok(assemble(rank, chern, sym, m, extra))
}

/// Invariants of the Fermi projection of H_Q at energy E inside a gap.
pub fn invariants_quaternionic(
    energy: f64,
    basis: TruncatedBasis,
    params: &ModelParams,
    tolerance: f64,
) -> Result<TopologicalReport> {
    let h = quaternionic_hamiltonian(basis, params)?;
    let sys = diagonalize(&h)?;
    let f = fermi_projection_from(&sys, energy, DEFAULT_GAP * params.eps_b)?;
    let margin = CURVATURE_MARGIN.max(f.incomplete_shells + CURVATURE_MARGIN);
    if basis.nmax() + 1 < margin + 12 {
        return domain(format!(
            "Nmax = {} leaves too few certified shells (margin {margin})",
            basis.nmax()
        ));
    }
    let (rank, chern, mut extra) = invariants_of_projection(&f.projection, params, margin, tolerance)?;
    let xi = quaternionic_trs(basis)?;
    extra.insert("trs_commutation".into(), xi.commutation_residual(&f.projection, margin));
    extra.insert("kramers_defect".into(), sys.kramers_defect(&xi));
    extra.insert("gap_width".into(), f.gap.width);
    let sym = classify_symmetry(&h, &[xi]);
    Ok(assemble(rank, chern, sym, margin, extra))
}
