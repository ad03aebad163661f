use std::path::PathBuf;

use landau_core::fock::{derived_operator, ladder, Derived, Ladder, OperatorMatrix, TruncatedBasis};
use landau_core::kernels::{integral_identity_target, verify_integral_identity, IdentityVariant};
use landau_core::models::{
    diagonalize, jc_energy, model_hamiltonian, nonabelian_field_check, Branch, Eigensystem, Model,
};
use landau_core::singtrace::{dixmier_via_zeta_residue, trace_q_power_proj};
use landau_core::topo::{invariants_jc, invariants_landau, invariants_quaternionic, verify_curvature_identity, TopologicalReport};
use landau_core::tuv::compare_tuv_dixmier;
use landau_core::{Error, C64};
use serde::Serialize;

use crate::config::{Check, Level, RunConfig};
use crate::output::{write_csv, write_json, Cell};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Config = 2,
    NotConverged = 3,
    Failed = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("no-gap: {0}")]
    NoGap(Error),
    #[error("{0}")]
    Core(Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Config(_) | CliError::NoGap(_) => Status::Config,
            CliError::Core(Error::NotConverged(_)) => Status::NotConverged,
            CliError::Core(Error::Domain(_)) => Status::Config,
            CliError::Core(_) | CliError::Io(_) => Status::Failed,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoGap(_) => CliError::NoGap(e),
            e => CliError::Core(e),
        }
    }
}

pub type Outcome = std::result::Result<(Status, Vec<PathBuf>), CliError>;

fn prepare_out(cfg: &RunConfig) -> std::io::Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
}

fn closed_form(cfg: &RunConfig, l: &Level) -> Option<f64> {
    let p = &cfg.params;
    match cfg.model {
        Model::Landau => Some(p.eps_b * (l.j as f64 + 0.5)),
        Model::JaynesCummings => Some(jc_energy(l.j, l.branch.unwrap_or(Branch::Plus), p)),
        Model::Quaternionic => None,
    }
}

/// Eigenvalue table (closed form next to diagonalized) and gap list.
pub fn cmd_spectrum(cfg: &RunConfig) -> Outcome {
    let basis = TruncatedBasis::new(cfg.nmax);
    let h = model_hamiltonian(cfg.model, basis, &cfg.params)?;
    let sys: Eigensystem = diagonalize(&h)?;
    let table = sys.spectrum();
    let interior: Vec<_> = table.levels.iter().filter(|l| l.interior).collect();
    let header = ["label", "closed_form", "diagonalized", "multiplicity", "interior_count"];
    let mut rows = Vec::new();
    if cfg.model == Model::Quaternionic {
        for l in interior.iter().filter(|l| l.energy <= cfg.emax * cfg.params.eps_b) {
            rows.push(vec![
                Cell::Empty,
                Cell::Empty,
                l.energy.into(),
                l.multiplicity.unwrap_or(0).into(),
                l.interior_count.unwrap_or(0).into(),
            ]);
        }
    } else {
        for lv in &cfg.levels {
            let e = closed_form(cfg, lv).unwrap_or(f64::NAN);
            let hit = interior
                .iter()
                .find(|l| (l.energy - e).abs() <= 1e-6 * e.abs().max(1.0));
            rows.push(vec![
                lv.to_string().into(),
                e.into(),
                hit.map(|l| l.energy).into(),
                hit.map_or(Cell::Empty, |l| l.multiplicity.unwrap_or(0).into()),
                hit.map_or(Cell::Empty, |l| l.interior_count.unwrap_or(0).into()),
            ]);
        }
    }
    prepare_out(cfg)?;
    let spec = cfg.out_dir.join("spectrum.csv");
    write_csv(&spec, &header, &rows)?;
    let gaps = cfg.out_dir.join("gaps.csv");
    let gap_rows: Vec<Vec<Cell>> = sys
        .gaps(cfg.gap_threshold)
        .iter()
        .map(|g| vec![g.lower.into(), g.upper.into(), g.width.into()])
        .collect();
    write_csv(&gaps, &["lower", "upper", "width"], &gap_rows)?;
    Ok((Status::Ok, vec![spec, gaps]))
}

#[derive(Serialize)]
struct InvariantEntry {
    target: String,
    report: TopologicalReport,
}

#[derive(Serialize)]
struct InvariantsFile {
    model: Model,
    nmax: usize,
    params: landau_core::ModelParams,
    tolerance: f64,
    results: Vec<InvariantEntry>,
}

fn report_status(r: &TopologicalReport) -> Status {
    if !r.parity_ok {
        Status::Failed
    } else if !r.resolved() || !r.rank_estimate.converged || !r.chern_estimate.converged {
        Status::NotConverged
    } else {
        Status::Ok
    }
}

/// Rank and Chern reports per level (Landau, JC) or Fermi energy (Quaternionic).
pub fn cmd_invariants(cfg: &RunConfig) -> Outcome {
    let basis = TruncatedBasis::new(cfg.nmax);
    let tol = cfg.tolerance_or(1e-3);
    let p = &cfg.params;
    let mut results = Vec::new();
    match cfg.model {
        Model::Landau => {
            for l in &cfg.levels {
                results.push(InvariantEntry {
                    target: l.to_string(),
                    report: invariants_landau(l.j, basis, p, tol)?,
                });
            }
        }
        Model::JaynesCummings => {
            for l in &cfg.levels {
                let Some(b) = l.branch else {
                    return Err(crate::config::ConfigError::new(
                        "levels",
                        format!("level `{l}`: invariants need a JC level j >= 1 with a sign"),
                    )
                    .into());
                };
                results.push(InvariantEntry {
                    target: l.to_string(),
                    report: invariants_jc(l.j, b, basis, p, tol)?,
                });
            }
        }
        Model::Quaternionic => {
            let Some(e) = cfg.fermi_energy else {
                return Err(crate::config::ConfigError::new(
                    "fermi_energy",
                    "the quaternionic model needs `fermi_energy`",
                )
                .into());
            };
            results.push(InvariantEntry {
                target: format!("E = {e}"),
                report: invariants_quaternionic(e, basis, p, tol)?,
            });
        }
    }
    let status = results.iter().map(|r| report_status(&r.report)).max().unwrap_or(Status::Ok);
    prepare_out(cfg)?;
    let path = cfg.out_dir.join("invariants.json");
    write_json(
        &path,
        &InvariantsFile {
            model: cfg.model,
            nmax: cfg.nmax,
            params: cfg.params,
            tolerance: tol,
            results,
        },
    )?;
    Ok((status, vec![path]))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub item: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

fn row(check: Check, item: impl Into<String>, residual: f64, tol: f64) -> CheckRow {
    CheckRow {
        check: check.name(),
        item: item.into(),
        residual,
        tolerance: tol,
        pass: residual <= tol,
        note: String::new(),
    }
}

fn failed_row(check: Check, item: impl Into<String>, tol: f64, e: &Error) -> CheckRow {
    CheckRow {
        check: check.name(),
        item: item.into(),
        residual: f64::NAN,
        tolerance: tol,
        pass: false,
        note: e.to_string(),
    }
}

fn run_check(cfg: &RunConfig, check: Check) -> Vec<CheckRow> {
    let tol = cfg.tolerance_or(check.default_tolerance());
    let p = &cfg.params;
    let basis = TruncatedBasis::new(cfg.nmax.max(8));
    let mut rows = Vec::new();
    match check {
        Check::Commutation => {
            let ap = ladder(basis, Ladder::APlus);
            let am = ladder(basis, Ladder::AMinus);
            let id = OperatorMatrix::identity(basis, 1);
            let d = |a: &OperatorMatrix, b: &OperatorMatrix| a.interior_block(1).max_abs_diff(&b.interior_block(1));
            rows.push(row(check, "[a-, a+] = 1", d(&am.commutator(&ap), &id), tol));
            let k1 = derived_operator(basis, Derived::K1, p);
            let k2 = derived_operator(basis, Derived::K2, p);
            let g1 = derived_operator(basis, Derived::G1, p);
            let g2 = derived_operator(basis, Derived::G2, p);
            rows.push(row(check, "[K1, K2] = -i", d(&k1.commutator(&k2), &id.scale(C64::new(0.0, -1.0))), tol));
            rows.push(row(check, "[G1, G2] = -i", d(&g1.commutator(&g2), &id.scale(C64::new(0.0, -1.0))), tol));
            let zero = OperatorMatrix::zeros(basis, 1);
            let mixed = [(&k1, &g1), (&k1, &g2), (&k2, &g1), (&k2, &g2)]
                .iter()
                .map(|(a, b)| d(&a.commutator(b), &zero))
                .fold(0.0, f64::max);
            rows.push(row(check, "[K_i, G_j] = 0", mixed, tol));
            let mut models = vec![Model::JaynesCummings];
            if p.validate_r().is_ok() {
                models.push(Model::Quaternionic);
            }
            for m in models {
                match nonabelian_field_check(p, m) {
                    Ok(f) => rows.push(row(
                        check,
                        format!("[K1, K2] = -i + c^2 [g1, g2] ({m})"),
                        f.kinetic_commutator_residual,
                        tol,
                    )),
                    Err(e) => rows.push(failed_row(check, m.to_string(), tol, &e)),
                }
            }
        }
        Check::Curvature => {
            let b = TruncatedBasis::new(cfg.nmax.max(9));
            for j in 0..=5usize.min(b.nmax() - 3) {
                match verify_curvature_identity(j, b, p) {
                    Ok(r) => {
                        rows.push(row(check, format!("Pi_{j}[d1 Pi_{j}, d2 Pi_{j}] = -i l^2 Pi_{j}"), r.curvature, tol));
                        rows.push(row(check, format!("[d1 Pi_{j}, d2 Pi_{j}]"), r.commutator, tol));
                    }
                    Err(e) => rows.push(failed_row(check, format!("j = {j}"), tol, &e)),
                }
            }
        }
        Check::IntegralIdentity => {
            let target = integral_identity_target();
            for j in 0..=2 {
                match verify_integral_identity(j, 6.0, 1e-6, IdentityVariant::Consistent) {
                    Ok(c) => rows.push(row(check, format!("j = {j}"), (c.refined - target).norm(), tol)),
                    Err(e) => rows.push(failed_row(check, format!("j = {j}"), tol, &e)),
                }
            }
        }
        Check::TuvDixmier => {
            for t in [vec![1.0], vec![0.3, -1.7, 0.8, 2.2]] {
                let item = format!("t = {t:?}");
                match compare_tuv_dixmier(&t, p.xi, p, tol) {
                    Ok(r) => rows.push(row(check, item, r.difference, tol)),
                    Err(e) => rows.push(failed_row(check, item, tol, &e)),
                }
            }
        }
        Check::ZetaClosedForms => {
            for j in 0..=3 {
                let item = format!("Res h zeta(1 + h) of Q^-1 Pi_{j}");
                match dixmier_via_zeta_residue(|s| trace_q_power_proj(s, p.xi, j), 1e-8) {
                    Ok(e) => rows.push(row(check, item, (e.value - 1.0).abs(), tol)),
                    Err(e) => rows.push(failed_row(check, item, tol, &e)),
                }
            }
        }
    }
    rows
}

/// Runs the selected identity checks and writes a pass/fail table.
pub fn cmd_verify(cfg: &RunConfig) -> Outcome {
    let mut rows = Vec::new();
    for &c in &cfg.checks {
        rows.extend(run_check(cfg, c));
    }
    for r in &rows {
        println!(
            "{:<5} {:<18} {:<48} residual {:>10.3e}  tol {:.1e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.item,
            r.residual,
            r.tolerance
        );
    }
    prepare_out(cfg)?;
    let path = cfg.out_dir.join("verify.csv");
    let cells: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                r.check.into(),
                r.item.clone().into(),
                r.residual.into(),
                r.tolerance.into(),
                r.pass.into(),
                r.note.clone().into(),
            ]
        })
        .collect();
    write_csv(&path, &["check", "item", "residual", "tolerance", "pass", "note"], &cells)?;
    let status = if rows.iter().all(|r| r.pass) {
        Status::Ok
    } else if rows.iter().any(|r| r.note.starts_with("not converged")) {
        Status::NotConverged
    } else {
        Status::Failed
    };
    Ok((status, vec![path]))
}
