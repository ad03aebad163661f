//! Landau, Jaynes-Cummings and Quaternionic Hamiltonians: closed-form spectra,
//! truncated matrices, spectral projections and time-reversal symmetries.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec;
use crate::fock::{
    derived_operator, flip_and_conjugation, ladder, landau_projection, pauli, spin_identity, spin_lincomb, spin_mul,
    AntiUnitaryRep, Derived, Ladder, OperatorMatrix, Spin2, Storage, TruncatedBasis,
};
use crate::params::ModelParams;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Landau,
    JaynesCummings,
    Quaternionic,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "landau" => Ok(Model::Landau),
            "jc" | "jaynes_cummings" | "jaynes-cummings" => Ok(Model::JaynesCummings),
            "q" | "quaternionic" => Ok(Model::Quaternionic),
            _ => Err(Error::UnknownName(format!("model '{s}'"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Landau => "landau",
            Model::JaynesCummings => "jaynes_cummings",
            Model::Quaternionic => "quaternionic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Diagonalized,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub energy: f64,
    /// Number of eigenvectors in the cluster; `None` for infinitely degenerate closed-form levels.
    pub multiplicity: Option<usize>,
    /// Certified eigenvectors in the cluster.
    pub interior_count: Option<usize>,
    pub interior: bool,
    pub label: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub levels: Vec<SpectrumLevel>,
    pub provenance: Provenance,
}

impl SpectrumTable {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn interior_energies(&self) -> Vec<f64> {
        self.levels.iter().filter(|l| l.interior).map(|l| l.energy).collect()
    }

    fn closed_form(mut levels: Vec<(f64, String)>) -> Self {
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        SpectrumTable {
            levels: levels
                .into_iter()
                .map(|(energy, label)| SpectrumLevel {
                    energy,
                    multiplicity: None,
                    interior_count: None,
                    interior: true,
                    label: Some(label),
                })
                .collect(),
            provenance: Provenance::ClosedForm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

impl GapRecord {
    pub fn contains(&self, e: f64) -> bool {
        self.lower < e && e < self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// E_j = eps (j + 1/2), j = 0..=jmax.
pub fn landau_levels(params: &ModelParams, jmax: usize) -> SpectrumTable {
    SpectrumTable::closed_form(
        (0..=jmax)
            .map(|j| (params.eps_b * (j as f64 + 0.5), format!("E{j}")))
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

/// tan theta_j^+- = sqrt(8 c^2 j) / (1 +- sqrt(1 + 8 c^2 j)), principal branch.
pub fn jc_angles(j: usize, c_b: f64) -> Result<(f64, f64)> {
    if j == 0 {
        return domain("JC angles are defined for j >= 1");
    }
    if !(c_b >= 0.0) {
        return domain(format!("c_b must be >= 0, got {c_b}"));
    }
    let num = (8.0 * c_b * c_b * j as f64).sqrt();
    let root = (1.0 + 8.0 * c_b * c_b * j as f64).sqrt();
    let plus = (num / (1.0 + root)).atan();
    // At c_b = 0 the minus denominator vanishes; the limit is -pi/2.
    let minus = if num == 0.0 { -FRAC_PI_2 } else { (num / (1.0 - root)).atan() };
    Ok((plus, minus))
}

/// E_0 = eps (1/2 + c^2), E_j^+- = eps (j +- sqrt(1 + 8 j c^2)/2 + c^2).
pub fn jc_energy(j: usize, branch: Branch, params: &ModelParams) -> f64 {
    let c2 = params.c_b * params.c_b;
    if j == 0 {
        return params.eps_b * (0.5 + c2);
    }
    let jf = j as f64;
    params.eps_b * (jf + branch.sign() * 0.5 * (1.0 + 8.0 * jf * c2).sqrt() + c2)
}

pub fn jc_spectrum(params: &ModelParams, jmax: usize) -> SpectrumTable {
    let mut levels = vec![(jc_energy(0, Branch::Plus, params), "E0".to_string())];
    for j in 1..=jmax {
        for b in [Branch::Plus, Branch::Minus] {
            levels.push((jc_energy(j, b, params), format!("E{j}{b}")));
        }
    }
    SpectrumTable::closed_form(levels)
}

/// sum_k A_k (x) s_k.
fn spin_sum(terms: &[(&OperatorMatrix, Spin2)]) -> Result<OperatorMatrix> {
    let mut out = OperatorMatrix::zeros(terms[0].0.basis(), 2);
    for (a, s) in terms {
        out = out.lincomb(re(1.0), &a.tensor_spin(s)?, re(1.0));
    }
    Ok(out)
}

fn scaled(s: &Spin2, c: C64) -> Spin2 {
    spin_lincomb(&[(c, *s)])
}

/// Spin matrices (gamma_1, gamma_2) of the non-Abelian potential.
pub fn gammas(model: Model, params: &ModelParams) -> (Spin2, Spin2) {
    let zero = [[C64::new(0.0, 0.0); 2]; 2];
    match model {
        Model::Landau => (zero, zero),
        Model::JaynesCummings => (scaled(&pauli(2), re(-1.0)), pauli(1)),
        Model::Quaternionic => {
            let [r0, r1, r2] = params.r;
            let s = spin_lincomb(&[(re(r1), pauli(1)), (re(r2), pauli(3))]);
            let id = spin_identity();
            (
                spin_lincomb(&[(re(-r0), id), (re(-1.0), s)]),
                spin_lincomb(&[(re(r0), id), (re(-1.0), s)]),
            )
        }
    }
}

/// Non-Abelian kinetic momenta K_i (x) 1 - c_b 1 (x) gamma_i.
pub fn kinetic_momenta(basis: TruncatedBasis, model: Model, params: &ModelParams) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (g1, g2) = gammas(model, params);
    let id = OperatorMatrix::identity(basis, 1);
    let k1 = derived_operator(basis, Derived::K1, params);
    let k2 = derived_operator(basis, Derived::K2, params);
    let c = re(-params.c_b);
    Ok((
        spin_sum(&[(&k1, spin_identity()), (&id, scaled(&g1, c))])?,
        spin_sum(&[(&k2, spin_identity()), (&id, scaled(&g2, c))])?,
    ))
}

/// H_JC = H_B (x) 1 + c eps (K1 (x) s2 - K2 (x) s1) + c^2 eps.
pub fn jc_hamiltonian(basis: TruncatedBasis, params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    let hb = derived_operator(basis, Derived::HB, params);
    let k1 = derived_operator(basis, Derived::K1, params);
    let k2 = derived_operator(basis, Derived::K2, params);
    let (c, e) = (params.c_b, params.eps_b);
    let id = OperatorMatrix::identity(basis, 1);
    let h = spin_sum(&[
        (&hb, spin_identity()),
        (&k1, scaled(&pauli(2), re(c * e))),
        (&k2, scaled(&pauli(1), re(-c * e))),
        (&id, scaled(&spin_identity(), re(c * c * e))),
    ])?;
    Ok(h.certified(1e-12))
}

/// Spectral projection P_j^+- of H_JC; j = 0 gives Pi_0 in the lower spin slot.
pub fn jc_projection(basis: TruncatedBasis, params: &ModelParams, j: usize, branch: Branch) -> Result<OperatorMatrix> {
    params.validate()?;
    if j + 1 > basis.nmax() {
        return domain(format!("level {j} needs Nmax >= {}", j + 1));
    }
    let zero = OperatorMatrix::zeros(basis, 1);
    if j == 0 {
        let p0 = landau_projection(basis, 0)?;
        return Ok(OperatorMatrix::from_spin_blocks([[&zero, &zero], [&zero, &p0]])?.certified(1e-12));
    }
    let (tp, tm) = jc_angles(j, params.c_b)?;
    let theta = match branch {
        Branch::Plus => tp,
        Branch::Minus => tm,
    };
    let (s, c) = theta.sin_cos();
    let pj = landau_projection(basis, j)?;
    let pj1 = landau_projection(basis, j - 1)?;
    let k = s * c / (j as f64).sqrt();
    let up = ladder(basis, Ladder::AMinus).matmul(&pj).scale(-I * k);
    let down = pj.matmul(&ladder(basis, Ladder::APlus)).scale(I * k);
    let b00 = pj1.scale_re(s * s);
    let b11 = pj.scale_re(c * c);
    Ok(OperatorMatrix::from_spin_blocks([[&b00, &up], [&down, &b11]])?.certified(1e-12))
}

/// Twisted flip Xi = (F (x) theta) C with theta = diag(1, i); Xi^2 = +1.
pub fn jc_trs(basis: TruncatedBasis) -> Result<AntiUnitaryRep> {
    let (_, _, big_theta) = flip_and_conjugation(basis);
    let vartheta = [[re(1.0), re(0.0)], [re(0.0), I]];
    Ok(AntiUnitaryRep {
        unitary_part: big_theta.unitary_part.tensor_spin(&vartheta)?,
        conjugates: true,
    })
}

fn check_r(params: &ModelParams) -> Result<()> {
    params.validate()?;
    params.validate_r()
}

/// A^- = a^- (x) 1 + c (e^{i pi/4} r0 1 + e^{-i pi/4} (r1 s1 + r2 s3)), A^+ = (A^-)^dagger.
pub fn quaternionic_ladders(basis: TruncatedBasis, params: &ModelParams) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_r(params)?;
    let [r0, r1, r2] = params.r;
    let c = params.c_b;
    let w = C64::from_polar(1.0, FRAC_PI_4);
    let m = spin_lincomb(&[(w * r0, spin_identity()), (w.conj() * r1, pauli(1)), (w.conj() * r2, pauli(3))]);
    let am = ladder(basis, Ladder::AMinus);
    let id = OperatorMatrix::identity(basis, 1);
    let a_minus = spin_sum(&[(&am, spin_identity()), (&id, scaled(&m, re(c)))])?;
    let a_plus = a_minus.adjoint();
    Ok((a_plus, a_minus))
}

/// H_Q = eps (A^+ A^- + 1/2).
pub fn quaternionic_hamiltonian(basis: TruncatedBasis, params: &ModelParams) -> Result<OperatorMatrix> {
    let (ap, am) = quaternionic_ladders(basis, params)?;
    let id = OperatorMatrix::identity(basis, 2);
    let h = ap.matmul(&am).lincomb(re(params.eps_b), &id, re(0.5 * params.eps_b));
    Ok(h.certified(1e-12))
}

/// W_Q = e^{i pi/4} a^+ (x) (r0 - i S) + e^{-i pi/4} a^- (x) (r0 + i S), S = r1 s1 + r2 s3.
pub fn quaternionic_perturbation(basis: TruncatedBasis, params: &ModelParams) -> Result<OperatorMatrix> {
    check_r(params)?;
    let [r0, r1, r2] = params.r;
    let s = spin_lincomb(&[(re(r1), pauli(1)), (re(r2), pauli(3))]);
    let w = C64::from_polar(1.0, FRAC_PI_4);
    let up = spin_lincomb(&[(re(r0), spin_identity()), (-I, s)]);
    let dn = spin_lincomb(&[(re(r0), spin_identity()), (I, s)]);
    let ap = ladder(basis, Ladder::APlus);
    let am = ladder(basis, Ladder::AMinus);
    spin_sum(&[(&ap, scaled(&up, w)), (&am, scaled(&dn, w.conj()))])
}

/// Xi' = (F (x) s2) C; Xi'^2 = -1.
pub fn quaternionic_trs(basis: TruncatedBasis) -> Result<AntiUnitaryRep> {
    let (_, _, big_theta) = flip_and_conjugation(basis);
    Ok(AntiUnitaryRep {
        unitary_part: big_theta.unitary_part.tensor_spin(&pauli(2))?,
        conjugates: true,
    })
}

/// Hamiltonian of a model: H_B for Landau (spin-free), H_JC or H_Q otherwise.
pub fn model_hamiltonian(model: Model, basis: TruncatedBasis, params: &ModelParams) -> Result<OperatorMatrix> {
    match model {
        Model::Landau => {
            params.validate()?;
            Ok(derived_operator(basis, Derived::HB, params))
        }
        Model::JaynesCummings => jc_hamiltonian(basis, params),
        Model::Quaternionic => quaternionic_hamiltonian(basis, params),
    }
}

/// Time-reversal candidate of a model: Theta, Xi or Xi'.
pub fn model_trs(model: Model, basis: TruncatedBasis) -> Result<AntiUnitaryRep> {
    match model {
        Model::Landau => Ok(flip_and_conjugation(basis).2),
        Model::JaynesCummings => jc_trs(basis),
        Model::Quaternionic => quaternionic_trs(basis),
    }
}

/// Eigenvectors with less than this mass on the outer two shells are interior.
pub const INTERIOR_MASS: f64 = 1e-8;
/// Eigenvalues closer than this (relative to max(1, |E|)) form one level.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Mass below which an eigenvector is said not to touch a shell.
pub const TOUCH_MASS: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenBlock {
    /// Row indices of the block in the full matrix.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Columns are normalized eigenvectors over `indices`.
    pub vectors: Mat<C64>,
    pub interior: Vec<bool>,
    /// Lowest shell carrying more than TOUCH_MASS of each eigenvector.
    pub lowest_shell: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub basis: TruncatedBasis,
    pub spin_dim: usize,
    pub blocks: Vec<EigenBlock>,
}

/// Connected components of the sparsity graph of `h`.
fn components(h: &OperatorMatrix) -> Vec<Vec<usize>> {
    let n = h.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    match h.storage() {
        Storage::Sparse(s) => {
            for r in 0..n {
                for (c, v) in s.row(r) {
                    if v != C64::new(0.0, 0.0) {
                        union(r, c);
                    }
                }
            }
        }
        Storage::Dense(m) => {
            for r in 0..n {
                for c in 0..n {
                    if m[(r, c)] != C64::new(0.0, 0.0) {
                        union(r, c);
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn check_hermitian(h: &OperatorMatrix) -> Result<()> {
    if h.hermitian_flag() {
        return Ok(());
    }
    let d = h.max_abs_diff(&h.adjoint());
    if d > 1e-12 {
        return domain(format!("matrix is not hermitian (defect {d:.3e})"));
    }
    Ok(())
}

/// Full hermitian eigendecomposition, block by block over the connected
/// components of the sparsity pattern, with interior certification.
pub fn diagonalize(h: &OperatorMatrix) -> Result<Eigensystem> {
    check_hermitian(h)?;
    let basis = h.basis();
    let sd = h.spin_dim();
    let outer = basis.nmax().saturating_sub(1);
    let comps = components(h);
    let blocks = exec::map_slice(&comps, |idx| -> Result<EigenBlock> {
        let k = idx.len();
        let sub = Mat::<C64>::from_fn(k, k, |a, b| h.get(idx[a], idx[b]));
        let eig = sub
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let s = eig.S().column_vector();
        let values: Vec<f64> = (0..k).map(|i| s[i].re).collect();
        let vectors = eig.U().to_owned();
        let shell = |row: usize| basis.index(idx[row] / sd).level();
        let mut interior = Vec::with_capacity(k);
        let mut lowest_shell = Vec::with_capacity(k);
        for col in 0..k {
            let mut mass = 0.0;
            let mut low = usize::MAX;
            for row in 0..k {
                let w = vectors[(row, col)].norm_sqr();
                let l = shell(row);
                if l >= outer {
                    mass += w;
                }
                if w > TOUCH_MASS {
                    low = low.min(l);
                }
            }
            interior.push(mass < INTERIOR_MASS);
            lowest_shell.push(low);
        }
        Ok(EigenBlock {
            indices: idx.clone(),
            values,
            vectors,
            interior,
            lowest_shell,
        })
    });
    Ok(Eigensystem {
        basis,
        spin_dim: sd,
        blocks: blocks.into_iter().collect::<Result<_>>()?,
    })
}

impl Eigensystem {
    /// (eigenvalue, interior) for every eigenvector, ascending.
    pub fn eigenvalues(&self) -> Vec<(f64, bool)> {
        let mut v: Vec<(f64, bool)> = self
            .blocks
            .iter()
            .flat_map(|b| b.values.iter().cloned().zip(b.interior.iter().cloned()))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    pub fn spectrum(&self) -> SpectrumTable {
        let vals = self.eigenvalues();
        let mut levels: Vec<SpectrumLevel> = Vec::new();
        let mut start = 0;
        while start < vals.len() {
            let mut end = start + 1;
            while end < vals.len() && vals[end].0 - vals[end - 1].0 <= CLUSTER_TOL * vals[end].0.abs().max(1.0) {
                end += 1;
            }
            let group = &vals[start..end];
            let n_int = group.iter().filter(|v| v.1).count();
            let energy = group.iter().map(|v| v.0).sum::<f64>() / group.len() as f64;
            levels.push(SpectrumLevel {
                energy,
                multiplicity: Some(group.len()),
                interior_count: Some(n_int),
                interior: n_int > 0,
                label: None,
            });
            start = end;
        }
        SpectrumTable {
            levels,
            provenance: Provenance::Diagonalized,
        }
    }

    /// Gaps wider than `threshold` between consecutive interior levels.
    pub fn gaps(&self, threshold: f64) -> Vec<GapRecord> {
        let e = self.spectrum().interior_energies();
        e.windows(2)
            .filter(|w| w[1] - w[0] > threshold)
            .map(|w| GapRecord {
                lower: w[0],
                upper: w[1],
                width: w[1] - w[0],
            })
            .collect()
    }

    /// Largest splitting inside Kramers pairs. Blocks linked by the unitary
    /// part of `trs` form invariant sectors; each sector's eigenvalues are
    /// paired in ascending order and pairs with an interior member count.
    pub fn kramers_defect(&self, trs: &AntiUnitaryRep) -> f64 {
        let n = self.basis.dim() * self.spin_dim;
        let mut owner = vec![0usize; n];
        for (b, blk) in self.blocks.iter().enumerate() {
            for &i in &blk.indices {
                owner[i] = b;
            }
        }
        let mut parent: Vec<usize> = (0..self.blocks.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let u = &trs.unitary_part;
        for r in 0..n {
            for c in 0..n {
                if u.get(r, c) != C64::new(0.0, 0.0) {
                    let (a, b) = (find(&mut parent, owner[r]), find(&mut parent, owner[c]));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut sectors: std::collections::BTreeMap<usize, Vec<(f64, bool)>> = Default::default();
        for (b, blk) in self.blocks.iter().enumerate() {
            let root = find(&mut parent, b);
            let e = sectors.entry(root).or_default();
            e.extend(blk.values.iter().cloned().zip(blk.interior.iter().cloned()));
        }
        let mut worst = 0.0f64;
        for mut v in sectors.into_values() {
            if v.len() % 2 == 1 {
                return f64::INFINITY;
            }
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            for p in v.chunks(2) {
                if p[0].1 || p[1].1 {
                    worst = worst.max(p[1].0 - p[0].0);
                }
            }
        }
        worst
    }

    /// Sum of v v^dagger over the selected eigenvectors.
    pub fn projection<F>(&self, select: F) -> OperatorMatrix
    where
        F: Fn(f64, bool) -> bool + Sync,
    {
        let parts = exec::map_slice(&self.blocks, |b| {
            let cols: Vec<usize> = (0..b.values.len()).filter(|&k| select(b.values[k], b.interior[k])).collect();
            let mut t = Vec::new();
            if cols.is_empty() {
                return t;
            }
            let n = b.indices.len();
            for r in 0..n {
                for c in 0..n {
                    let v: C64 = cols.iter().map(|&k| b.vectors[(r, k)] * b.vectors[(c, k)].conj()).sum();
                    if v.norm() > 1e-15 {
                        t.push((b.indices[r], b.indices[c], v));
                    }
                }
            }
            t
        });
        let triplets: Vec<_> = parts.into_iter().flatten().collect();
        OperatorMatrix::from_triplets(self.basis, self.spin_dim, &triplets).certified(1e-12)
    }
}

/// Eigendecomposition, clustered spectrum and gaps wider than `gap_threshold`.
pub fn diagonalize_and_gaps(h: &OperatorMatrix, gap_threshold: f64) -> Result<(SpectrumTable, Vec<GapRecord>)> {
    let sys = diagonalize(h)?;
    Ok((sys.spectrum(), sys.gaps(gap_threshold)))
}

/// Default gap threshold in units of eps_B.
pub const DEFAULT_GAP: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct FermiProjection {
    pub projection: OperatorMatrix,
    pub gap: GapRecord,
    /// Number of outer shells on which P_E may miss uncertified eigenvectors below E.
    pub incomplete_shells: usize,
}

/// P_E from interior eigenvectors with eigenvalue <= E; E must lie in a gap
/// of width above `gap_threshold`.
pub fn fermi_projection(h: &OperatorMatrix, energy: f64, gap_threshold: f64) -> Result<FermiProjection> {
    let sys = diagonalize(h)?;
    fermi_projection_from(&sys, energy, gap_threshold)
}

pub fn fermi_projection_from(sys: &Eigensystem, energy: f64, gap_threshold: f64) -> Result<FermiProjection> {
    let gap = sys
        .gaps(gap_threshold)
        .into_iter()
        .find(|g| g.contains(energy))
        .ok_or(Error::NoGap(energy))?;
    let projection = sys.projection(|e, interior| interior && e <= energy);
    let nmax = sys.basis.nmax();
    let mut lowest = nmax + 1;
    for b in &sys.blocks {
        for k in 0..b.values.len() {
            if !b.interior[k] && b.values[k] <= energy {
                lowest = lowest.min(b.lowest_shell[k]);
            }
        }
    }
    Ok(FermiProjection {
        projection,
        gap,
        incomplete_shells: nmax + 1 - lowest,
    })
}

/// (i / 2 pi) contour integral of (H - z)^-1 over the circle, trapezoid rule
/// with `quad_points` nodes, evaluated block by block.
pub fn riesz_projection(h: &OperatorMatrix, center: f64, radius: f64, quad_points: usize) -> Result<OperatorMatrix> {
    check_hermitian(h)?;
    if !(radius > 0.0) || quad_points < 4 {
        return domain("contour needs a positive radius and at least 4 nodes");
    }
    let comps = components(h);
    let parts = exec::map_slice(&comps, |idx| -> Result<Vec<(usize, usize, C64)>> {
        let k = idx.len();
        let sub = Mat::<C64>::from_fn(k, k, |a, b| h.get(idx[a], idx[b]));
        let eig = sub
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let s = eig.S().column_vector();
        for i in 0..k {
            if ((s[i].re - center).abs() - radius).abs() < 1e-6 {
                return Err(Error::Numerical(format!(
                    "eigenvalue {} within 1e-6 of the contour",
                    s[i].re
                )));
            }
        }
        let id = Mat::<C64>::identity(k, k);
        let mut acc = Mat::<C64>::zeros(k, k);
        for q in 0..quad_points {
            let w = C64::from_polar(1.0, 2.0 * PI * q as f64 / quad_points as f64);
            let z = re(center) + w * radius;
            let shifted = Mat::<C64>::from_fn(k, k, |a, b| sub[(a, b)] - if a == b { z } else { re(0.0) });
            let inv = shifted.partial_piv_lu().solve(&id);
            let f = -w * (radius / quad_points as f64);
            acc = acc + Mat::<C64>::from_fn(k, k, |a, b| inv[(a, b)] * f);
        }
        let mut t = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if acc[(a, b)].norm() > 1e-15 {
                    t.push((idx[a], idx[b], acc[(a, b)]));
                }
            }
        }
        Ok(t)
    });
    let mut triplets = Vec::new();
    for p in parts {
        triplets.extend(p?);
    }
    Ok(OperatorMatrix::from_triplets(h.basis(), h.spin_dim(), &triplets))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldReport {
    pub model: Model,
    pub gamma_commutator: Spin2,
    /// -i [gamma_1, gamma_2]: the non-Abelian part of B_perp in units of b^2/hbar.
    pub field_pattern: Spin2,
    pub sigma3_coefficient: f64,
    /// B_perp / B = 1 + c_b^2 (-i [gamma_1, gamma_2]).
    pub field_over_b: Spin2,
    pub abelian: bool,
    /// max |[K1, K2] - (-i + c_b^2 [gamma_1, gamma_2])| on an interior block.
    pub kinetic_commutator_residual: f64,
}

pub fn nonabelian_field_check(params: &ModelParams, model: Model) -> Result<FieldReport> {
    if model == Model::Quaternionic {
        check_r(params)?;
    } else {
        params.validate()?;
    }
    let (g1, g2) = gammas(model, params);
    let comm = spin_lincomb(&[(re(1.0), spin_mul(&g1, &g2)), (re(-1.0), spin_mul(&g2, &g1))]);
    let pattern = scaled(&comm, -I);
    let c2 = params.c_b * params.c_b;
    let field = spin_lincomb(&[(re(1.0), spin_identity()), (re(c2), pattern)]);
    let abelian = crate::fock::spin_max_abs(&spin_lincomb(&[(re(c2), pattern)])) < 1e-14;

    let basis = TruncatedBasis::new(12);
    let (k1, k2) = kinetic_momenta(basis, model, params)?;
    let lhs = k1.commutator(&k2);
    let id = OperatorMatrix::identity(basis, 1);
    let rhs = spin_sum(&[(&id, spin_lincomb(&[(-I, spin_identity()), (re(c2), comm)]))])?;
    let residual = lhs.interior_block(1).max_abs_diff(&rhs.interior_block(1));
    Ok(FieldReport {
        model,
        gamma_commutator: comm,
        field_pattern: pattern,
        sigma3_coefficient: 0.5 * (pattern[0][0] - pattern[1][1]).re,
        field_over_b: field,
        abelian,
        kinetic_commutator_residual: residual,
    })
}
