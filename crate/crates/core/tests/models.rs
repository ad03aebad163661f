use approx::assert_abs_diff_eq;
use landau_core::fock::{derived_operator, landau_projection, pauli, spin_identity, Derived, OperatorMatrix, TruncatedBasis};
use landau_core::models::*;
use landau_core::{ModelParams, C64};
use proptest::prelude::*;

fn params(c_b: f64) -> ModelParams {
    ModelParams::default().with_c_b(c_b)
}

fn q_params(c_b: f64, r: [f64; 3]) -> ModelParams {
    let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    ModelParams::default().with_c_b(c_b).with_r([r[0] / n, r[1] / n, r[2] / n])
}

fn check_projection(p: &OperatorMatrix, margin: usize, tol: f64) {
    let pi = p.interior_block(margin);
    assert!(pi.max_abs_diff(&pi.adjoint()) < tol);
    let sq = p.matmul(p).interior_block(margin);
    assert!(sq.max_abs_diff(&pi) < tol, "idempotency defect {}", sq.max_abs_diff(&pi));
}

#[test]
fn landau_levels_closed_form() {
    let p = ModelParams::default();
    let t = landau_levels(&p, 5);
    assert_eq!(t.provenance, Provenance::ClosedForm);
    assert_abs_diff_eq!(t.levels[0].energy, 0.5 * p.eps_b);
    for w in t.energies().windows(2) {
        assert_abs_diff_eq!(w[1] - w[0], p.eps_b, epsilon = 1e-14);
    }
    assert_eq!(landau_levels(&p, 0).levels.len(), 1);
}

#[test]
fn jc_angles_examples() {
    assert!(jc_angles(0, 1.0).is_err());
    let (tp, tm) = jc_angles(3, 0.0).unwrap();
    assert_eq!(tp, 0.0);
    assert_abs_diff_eq!(tm, -std::f64::consts::FRAC_PI_2);
    let (tp, _) = jc_angles(1, 1.0).unwrap();
    assert_abs_diff_eq!(tp.tan(), 8f64.sqrt() / 4.0, epsilon = 1e-14);
}

#[test]
fn jc_spectrum_reduces_to_landau() {
    let p = params(0.0);
    assert_abs_diff_eq!(jc_energy(0, Branch::Plus, &p), 0.5);
    for j in 1..6 {
        assert_abs_diff_eq!(jc_energy(j, Branch::Plus, &p), j as f64 + 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(jc_energy(j, Branch::Minus, &p), j as f64 - 0.5, epsilon = 1e-14);
    }
    let t = jc_spectrum(&params(0.3), 4);
    assert_eq!(t.levels.len(), 9);
    assert!(t.energies().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn jc_block_form_matches_tensor_form() {
    let basis = TruncatedBasis::new(10);
    let p = params(0.7);
    let h = jc_hamiltonian(basis, &p).unwrap();
    let hb = derived_operator(basis, Derived::HB, &p);
    let am = landau_core::fock::ladder(basis, landau_core::fock::Ladder::AMinus);
    let ap = landau_core::fock::ladder(basis, landau_core::fock::Ladder::APlus);
    let k = 2f64.sqrt() * p.c_b * p.eps_b;
    let shift = OperatorMatrix::identity(basis, 1).scale_re(p.c_b * p.c_b * p.eps_b);
    let d = hb.lincomb(C64::new(1.0, 0.0), &shift, C64::new(1.0, 0.0));
    let up = am.scale(C64::new(0.0, -k));
    let dn = ap.scale(C64::new(0.0, k));
    let block = OperatorMatrix::from_spin_blocks([[&d, &up], [&dn, &d]]).unwrap();
    assert!(h.max_abs_diff(&block) < 1e-13);
}

#[test]
fn jc_diagonalization_reproduces_closed_form() {
    let basis = TruncatedBasis::new(24);
    for c_b in [0.0, 0.3, 1.0] {
        let p = params(c_b);
        let h = jc_hamiltonian(basis, &p).unwrap();
        let t = diagonalize_and_gaps(&h, DEFAULT_GAP).unwrap().0;
        let exact = jc_spectrum(&p, 30).energies();
        let interior = t.interior_energies();
        assert!(interior.len() > 10);
        for e in interior {
            let d = exact.iter().map(|x| (x - e).abs()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8, "c_b = {c_b}: interior eigenvalue {e} off by {d}");
        }
    }
}

#[test]
fn jc_projections_are_eigenprojections() {
    let basis = TruncatedBasis::new(14);
    let p = params(0.6);
    let h = jc_hamiltonian(basis, &p).unwrap();
    let mut all = vec![(0, Branch::Plus)];
    for j in 1..6 {
        all.push((j, Branch::Plus));
        all.push((j, Branch::Minus));
    }
    let projs: Vec<_> = all
        .iter()
        .map(|&(j, b)| jc_projection(basis, &p, j, b).unwrap())
        .collect();
    for (&(j, b), pj) in all.iter().zip(&projs) {
        check_projection(pj, 3, 1e-10);
        let e = jc_energy(j, b, &p);
        let lhs = h.matmul(pj).interior_block(3);
        let rhs = pj.scale_re(e).interior_block(3);
        assert!(lhs.max_abs_diff(&rhs) < 1e-8, "H P != E P for j={j}{b}");
    }
    let mut sum = OperatorMatrix::zeros(basis, 2);
    for (a, pa) in projs.iter().enumerate() {
        for pb in projs.iter().skip(a + 1) {
            assert!(pa.matmul(pb).interior_block(3).max_abs() < 1e-10);
        }
        sum = sum.lincomb(C64::new(1.0, 0.0), pa, C64::new(1.0, 0.0));
    }
    // 0 <= sum <= 1 on the interior block.
    let s = sum.interior_block(3).to_dense();
    let eig = s.self_adjoint_eigen(faer::Side::Lower).unwrap();
    let v = eig.S().column_vector();
    for i in 0..v.nrows() {
        assert!(v[i].re > -1e-10 && v[i].re < 1.0 + 1e-10);
    }
    assert!(jc_projection(TruncatedBasis::new(4), &p, 4, Branch::Plus).is_err());
}

#[test]
fn jc_fibered_rank_is_one() {
    // Spin-traced diagonal of P_j^+- on the shell-j fibre: sin^2 + cos^2.
    let basis = TruncatedBasis::new(12);
    let p = params(0.8);
    for j in 1..5 {
        for b in [Branch::Plus, Branch::Minus] {
            let tr = jc_projection(basis, &p, j, b).unwrap().spin_trace().unwrap();
            let pj = landau_projection(basis, j).unwrap();
            let pj1 = landau_projection(basis, j - 1).unwrap();
            let (tp, tm) = jc_angles(j, p.c_b).unwrap();
            let th = if b == Branch::Plus { tp } else { tm };
            let want = pj1
                .scale_re(th.sin().powi(2))
                .lincomb(C64::new(1.0, 0.0), &pj.scale_re(th.cos().powi(2)), C64::new(1.0, 0.0));
            assert!(tr.max_abs_diff(&want) < 1e-12);
            assert_abs_diff_eq!(th.sin().powi(2) + th.cos().powi(2), 1.0, epsilon = 1e-15);
        }
    }
}

#[test]
fn jc_time_reversal() {
    let basis = TruncatedBasis::new(12);
    let p = params(0.9);
    let xi = jc_trs(basis).unwrap();
    assert_eq!(xi.square_sign(), Some(1));
    let h = jc_hamiltonian(basis, &p).unwrap();
    assert!(xi.commutation_residual(&h, 2) < 1e-10);
    for j in 1..4 {
        for b in [Branch::Plus, Branch::Minus] {
            let pj = jc_projection(basis, &p, j, b).unwrap();
            assert!(xi.commutation_residual(&pj, 3) < 1e-10);
        }
    }
}

#[test]
fn quaternionic_forms_agree() {
    let basis = TruncatedBasis::new(12);
    for (c_b, r) in [(0.5, [1.0, 0.0, 0.0]), (1.2, [0.3, -0.5, 0.8]), (0.0, [0.0, 1.0, 1.0])] {
        let p = q_params(c_b, r);
        let h = quaternionic_hamiltonian(basis, &p).unwrap();
        let hb = derived_operator(basis, Derived::HB, &p).tensor_spin(&spin_identity()).unwrap();
        let w = quaternionic_perturbation(basis, &p).unwrap();
        let alt = hb
            .lincomb(C64::new(1.0, 0.0), &w, C64::new(c_b * p.eps_b, 0.0))
            .lincomb(
                C64::new(1.0, 0.0),
                &OperatorMatrix::identity(basis, 2),
                C64::new(c_b * c_b * p.eps_b, 0.0),
            );
        assert!(h.max_abs_diff(&alt) < 1e-10);
        if c_b == 0.0 {
            assert!(h.max_abs_diff(&hb) < 1e-13);
        }
    }
    let bad = ModelParams::default().with_r([1.0, 1.0, 0.0]);
    assert!(quaternionic_hamiltonian(basis, &bad).is_err());
}

#[test]
fn quaternionic_ground_eigenvectors_of_a_minus() {
    let basis = TruncatedBasis::new(6);
    let p = q_params(0.7, [0.4, 0.6, -0.3]);
    let [r0, r1, r2] = p.r;
    let rho = (r1 * r1 + r2 * r2).sqrt();
    let (_, am) = quaternionic_ladders(basis, &p).unwrap();
    // Eigenvectors of S = [[r2, r1], [r1, -r2]] for eigenvalue sigma rho.
    for sigma in [1.0, -1.0] {
        let v = [r1, sigma * rho - r2];
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let want = w * p.c_b * C64::new(r0, -sigma * rho);
        for m in 0..4 {
            let i = basis.index_of(landau_core::fock::FockIndex::new(0, m)).unwrap();
            let mut phi = vec![C64::new(0.0, 0.0); basis.dim() * 2];
            phi[2 * i] = C64::new(v[0] / n, 0.0);
            phi[2 * i + 1] = C64::new(v[1] / n, 0.0);
            let out = am.apply(&phi);
            for k in 0..phi.len() {
                assert!((out[k] - want * phi[k]).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn quaternionic_kramers_and_positivity() {
    let basis = TruncatedBasis::new(20);
    let p = q_params(0.8, [0.2, 0.7, 0.5]);
    let h = quaternionic_hamiltonian(basis, &p).unwrap();
    let xi = quaternionic_trs(basis).unwrap();
    assert_eq!(xi.square_sign(), Some(-1));
    assert!(xi.commutation_residual(&h, 2) < 1e-10);
    let sys = diagonalize(&h).unwrap();
    assert!(sys.kramers_defect(&xi) < 1e-8);
    let t = sys.spectrum();
    for l in t.levels.iter().filter(|l| l.interior) {
        assert!(l.energy >= 0.5 * p.eps_b - 1e-10);
        assert_eq!(l.interior_count.unwrap() % 2, 0, "odd interior multiplicity at {}", l.energy);
    }
}

#[test]
fn hamiltonians_commute_with_magnetic_translations() {
    let basis = TruncatedBasis::new(12);
    let p = q_params(0.9, [0.5, 0.5, 0.7]);
    for h in [jc_hamiltonian(basis, &p).unwrap(), quaternionic_hamiltonian(basis, &p).unwrap()] {
        for g in [Derived::G1, Derived::G2] {
            let g = derived_operator(basis, g, &p).tensor_spin(&spin_identity()).unwrap();
            assert!(h.commutator(&g).interior_block(2).max_abs() < 1e-10);
        }
    }
}

#[test]
fn fermi_projection_landau_and_jc() {
    let basis = TruncatedBasis::new(16);
    let p = ModelParams::default();
    let h = derived_operator(basis, Derived::HB, &p).tensor_spin(&spin_identity()).unwrap();
    let f = fermi_projection(&h, 1.0, DEFAULT_GAP).unwrap();
    let want = landau_projection(basis, 0).unwrap().tensor_spin(&spin_identity()).unwrap();
    assert!(f.projection.interior_block(2).max_abs_diff(&want.interior_block(2)) < 1e-12);
    assert!(fermi_projection(&h, 1.5, DEFAULT_GAP).is_err());

    let p = params(0.1);
    let h = jc_hamiltonian(basis, &p).unwrap();
    for (e, levels) in [
        (1.0, vec![(0, Branch::Plus), (1, Branch::Minus)]),
        (2.0, vec![(0, Branch::Plus), (1, Branch::Minus), (1, Branch::Plus), (2, Branch::Minus)]),
    ] {
        let f = fermi_projection(&h, e, DEFAULT_GAP).unwrap();
        check_projection(&f.projection, 0, 1e-10);
        let mut want = OperatorMatrix::zeros(basis, 2);
        for (j, b) in levels {
            want = want.lincomb(C64::new(1.0, 0.0), &jc_projection(basis, &p, j, b).unwrap(), C64::new(1.0, 0.0));
        }
        let m = f.incomplete_shells.max(3);
        assert!(f.projection.interior_block(m).max_abs_diff(&want.interior_block(m)) < 1e-8);
    }
}

#[test]
fn riesz_projection_examples() {
    let basis = TruncatedBasis::new(12);
    let p = ModelParams::default();
    let hb = derived_operator(basis, Derived::HB, &p);
    for j in 0..4 {
        let r = riesz_projection(&hb, j as f64 + 0.5, 0.4, 64).unwrap();
        assert!(r.max_abs_diff(&landau_projection(basis, j).unwrap()) < 1e-8);
    }
    assert!(riesz_projection(&hb, -5.0, 1.0, 64).unwrap().max_abs() < 1e-12);
    assert!(riesz_projection(&hb, 1.0, 0.5, 64).is_err());

    let p = params(0.4);
    let h = jc_hamiltonian(basis, &p).unwrap();
    let sys = diagonalize(&h).unwrap();
    let gaps = sys.gaps(DEFAULT_GAP);
    let (g0, g1) = (gaps[0], gaps[1]);
    let diff = fermi_projection_from(&sys, g1.midpoint(), DEFAULT_GAP)
        .unwrap()
        .projection
        .lincomb(
            C64::new(1.0, 0.0),
            &fermi_projection_from(&sys, g0.midpoint(), DEFAULT_GAP).unwrap().projection,
            C64::new(-1.0, 0.0),
        );
    let c = 0.5 * (g0.midpoint() + g1.midpoint());
    let r = riesz_projection(&h, c, 0.5 * (g1.midpoint() - g0.midpoint()), 128).unwrap();
    assert!(r.interior_block(3).max_abs_diff(&diff.interior_block(3)) < 1e-8);
}

#[test]
fn nonabelian_fields() {
    let jc = nonabelian_field_check(&params(0.5), Model::JaynesCummings).unwrap();
    let s3 = pauli(3);
    for a in 0..2 {
        for b in 0..2 {
            assert!((jc.field_pattern[a][b] - s3[a][b] * 2.0).norm() < 1e-15);
        }
    }
    assert_abs_diff_eq!(jc.sigma3_coefficient, 2.0);
    assert!(!jc.abelian);
    assert!(jc.kinetic_commutator_residual < 1e-10);

    let q = nonabelian_field_check(&q_params(0.5, [0.3, 0.4, 0.5]), Model::Quaternionic).unwrap();
    assert!(q.abelian);
    assert!(landau_core::fock::spin_max_abs(&q.gamma_commutator) < 1e-15);
    assert!(q.kinetic_commutator_residual < 1e-10);

    assert!(nonabelian_field_check(&params(0.0), Model::JaynesCummings).unwrap().abelian);
}

#[test]
fn model_names_parse() {
    assert_eq!("jc".parse::<Model>().unwrap(), Model::JaynesCummings);
    assert_eq!("Quaternionic".parse::<Model>().unwrap(), Model::Quaternionic);
    assert!("rashba".parse::<Model>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jc_energies_bracket(j in 1usize..40, c_b in 0.0f64..3.0) {
        let p = params(c_b);
        let (tp, tm) = jc_angles(j, c_b).unwrap();
        prop_assert!(tp >= 0.0 && tp < std::f64::consts::FRAC_PI_2);
        prop_assert!(tm <= 0.0 && tm >= -std::f64::consts::FRAC_PI_2);
        let gap = jc_energy(j, Branch::Plus, &p) - jc_energy(j, Branch::Minus, &p);
        prop_assert!((gap - (1.0 + 8.0 * j as f64 * c_b * c_b).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn quaternionic_kramers_random(r0 in -1.0f64..1.0, r1 in -1.0f64..1.0, r2 in -1.0f64..1.0, c_b in 0.0f64..1.5) {
        prop_assume!(r0 * r0 + r1 * r1 + r2 * r2 > 0.01);
        let basis = TruncatedBasis::new(10);
        let h = quaternionic_hamiltonian(basis, &q_params(c_b, [r0, r1, r2])).unwrap();
        let sys = diagonalize(&h).unwrap();
        prop_assert!(sys.kramers_defect(&quaternionic_trs(basis).unwrap()) < 1e-8);
    }
}
