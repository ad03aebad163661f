//! Trace per unit volume over Folner families, and its comparison with the
//! Dixmier trace of Q^-1 T.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exec;
use crate::fit::least_squares;
use crate::fock::OperatorMatrix;
use crate::kernels::{integrate_kernel_diagonal, landau_kernel, QuadratureRule, Region, DEFAULT_ORDER};
use crate::params::ModelParams;
use crate::singtrace::{dixmier_via_zeta_residue, trace_q_power_proj, DixmierEstimate};

/// An operator given by its matrix over the Laguerre basis, or a finite
/// combination sum_j t_j Pi_j with closed-form kernels.
#[derive(Clone, Debug)]
pub enum KernelOperator {
    Matrix(OperatorMatrix),
    Landau(Vec<f64>),
}

impl KernelOperator {
    pub fn projection(j: usize) -> Self {
        let mut t = vec![0.0; j + 1];
        t[j] = 1.0;
        KernelOperator::Landau(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FolnerShape {
    Squares,
    Disks,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FolnerFamily {
    pub shape: FolnerShape,
    /// Half-widths (squares) or radii (disks).
    pub sizes: Vec<f64>,
}

impl FolnerFamily {
    pub fn new(shape: FolnerShape, sizes: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes[0] <= 0.0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
            return domain("Folner sizes must be positive and strictly increasing");
        }
        Ok(FolnerFamily { shape, sizes })
    }

    /// Scales {4, 6, 8, 12} in units of l_B.
    pub fn default_for(shape: FolnerShape, params: &ModelParams) -> Self {
        let sizes = [4.0, 6.0, 8.0, 12.0].iter().map(|s| s * params.ell_b).collect();
        FolnerFamily { shape, sizes }
    }

    pub fn regions(&self) -> Vec<Region> {
        self.sizes
            .iter()
            .map(|&s| match self.shape {
                FolnerShape::Squares => Region::square_centered(2.0 * s),
                FolnerShape::Disks => Region::disk_centered(s),
            })
            .collect()
    }
}

/// Tr(chi T chi) = integral over the region of T(x, x).
pub fn restricted_trace(t: &KernelOperator, region: &Region, params: &ModelParams, tol: f64) -> Result<f64> {
    params.validate()?;
    match t {
        KernelOperator::Matrix(m) => Ok(integrate_kernel_diagonal(m, region, params, tol)?.re),
        KernelOperator::Landau(coeffs) => {
            let rule = QuadratureRule::for_region(region, DEFAULT_ORDER / 4);
            let v = rule.integrate(|x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| landau_kernel(j, x, x, params) * c)
                    .sum()
            });
            Ok(v.re)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuvRow {
    pub region: Region,
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuvResult {
    pub limit: f64,
    pub converged: bool,
    pub residual: f64,
    pub rows: Vec<TuvRow>,
}

/// Extrapolates Tr(chi T chi)/|region| with c0 + c1/scale over the family.
pub fn tuv_limit(t: &KernelOperator, family: &FolnerFamily, params: &ModelParams, tolerance: f64) -> Result<TuvResult> {
    if family.sizes.len() < 4 {
        return domain("a Folner family needs at least 4 members");
    }
    let regions = family.regions();
    let raws = exec::map_slice(&regions, |r| restricted_trace(t, r, params, tolerance));
    let mut rows = Vec::with_capacity(regions.len());
    for (region, raw) in regions.into_iter().zip(raws) {
        let raw = raw?;
        rows.push(TuvRow {
            region,
            raw,
            normalized: raw / region.measure(),
        });
    }
    let xs: Vec<f64> = family.sizes.clone();
    let ys: Vec<f64> = rows.iter().map(|r| r.normalized).collect();
    let fit = least_squares(&xs, &ys, 2, |s, k| if k == 0 { 1.0 } else { 1.0 / s })?;
    let residual = fit.max_residual;
    Ok(TuvResult {
        limit: fit.coeffs[0],
        converged: residual <= tolerance,
        residual,
        rows,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuvDixmierReport {
    /// (1/(2 Omega_B)) TrDix(Q^-1 T), Omega_B = pi l^2.
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
    pub agree: bool,
    pub estimates: Vec<DixmierEstimate>,
    pub tuv: TuvResult,
}

/// Both sides of TrDix(Q_{B,xi}^-1 T) / (2 Omega_B) = T_B(T) for T = sum_j t_j Pi_j.
pub fn compare_tuv_dixmier(t: &[f64], xi: f64, params: &ModelParams, tolerance: f64) -> Result<TuvDixmierReport> {
    params.validate()?;
    let omega = PI * params.ell_b * params.ell_b;
    let mut estimates = Vec::with_capacity(t.len());
    let mut dix = 0.0;
    for (j, &c) in t.iter().enumerate() {
        let e = dixmier_via_zeta_residue(|s| trace_q_power_proj(s, xi, j), 1e-8)?;
        dix += c * e.value;
        estimates.push(e);
    }
    let lhs = dix / (2.0 * omega);
    let family = FolnerFamily::default_for(FolnerShape::Squares, params);
    let tuv = tuv_limit(&KernelOperator::Landau(t.to_vec()), &family, params, tolerance)?;
    let difference = (lhs - tuv.limit).abs();
    Ok(TuvDixmierReport {
        lhs,
        rhs: tuv.limit,
        difference,
        agree: difference <= tolerance,
        estimates,
        tuv,
    })
}

/// Integrated density of states of H_B: #{j : eps (j + 1/2) <= E} / (2 pi l^2).
pub fn idos(energy: f64, params: &ModelParams) -> f64 {
    // The slack keeps E = E_j on the closed side of the step.
    let e = energy / params.eps_b - 0.5 + 1e-12;
    let count = if e < 0.0 { 0.0 } else { e.floor() + 1.0 };
    count / (2.0 * PI * params.ell_b * params.ell_b)
}
