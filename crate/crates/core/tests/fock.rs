use landau_core::fock::*;
use landau_core::{ModelParams, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn id(b: TruncatedBasis) -> OperatorMatrix {
    OperatorMatrix::identity(b, 1)
}

#[test]
fn basis_ordering() {
    let b = build_basis(0);
    assert_eq!(b.dim(), 1);
    assert_eq!(b.index(0), FockIndex::new(0, 0));
    let b = build_basis(2);
    let order: Vec<_> = b.iter().map(|n| (n.n1, n.n2)).collect();
    assert_eq!(order, vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
    assert_eq!(build_basis(40).dim(), 861);
    assert_eq!(build_basis(120).dim(), 7381);
}

#[test]
fn ladder_matrix_elements() {
    let b = build_basis(8);
    let am = ladder(b, Ladder::AMinus);
    let ap = ladder(b, Ladder::APlus);
    let bm = ladder(b, Ladder::BMinus);
    let ix = |n1, n2| b.index_of(FockIndex::new(n1, n2)).unwrap();
    assert_eq!(am.get(ix(0, 0), ix(1, 0)), c(1.0, 0.0));
    assert!((ap.get(ix(3, 3), ix(2, 3)) - c(3f64.sqrt(), 0.0)).norm() < 1e-15);
    for n in 0..=8 {
        let col = ix(n, 0);
        assert!((0..b.dim()).all(|r| bm.get(r, col) == c(0.0, 0.0)));
    }
    // raising out of the truncation gives zero
    let top = ix(8, 0);
    assert!((0..b.dim()).all(|r| ap.get(r, top) == c(0.0, 0.0)));
}

#[test]
fn canonical_commutation_on_interior() {
    let b = build_basis(12);
    let p = ModelParams::default();
    let am = ladder(b, Ladder::AMinus);
    let ap = ladder(b, Ladder::APlus);
    let bm = ladder(b, Ladder::BMinus);
    let bp = ladder(b, Ladder::BPlus);
    let one = id(b).interior_block(1);
    assert!(am.commutator(&ap).interior_block(1).max_abs_diff(&one) <= 1e-12);
    assert!(bm.commutator(&bp).interior_block(1).max_abs_diff(&one) <= 1e-12);
    for (x, y) in [(&ap, &bp), (&am, &bm), (&ap, &bm), (&am, &bp)] {
        assert!(x.commutator(y).interior_block(1).max_abs() <= 1e-12);
    }
    let k1 = derived_operator(b, Derived::K1, &p);
    let k2 = derived_operator(b, Derived::K2, &p);
    let g1 = derived_operator(b, Derived::G1, &p);
    let g2 = derived_operator(b, Derived::G2, &p);
    let mi = one.scale(c(0.0, -1.0));
    assert!(k1.commutator(&k2).interior_block(1).max_abs_diff(&mi) <= 1e-12);
    assert!(g1.commutator(&g2).interior_block(1).max_abs_diff(&mi) <= 1e-12);
    for k in [&k1, &k2] {
        for g in [&g1, &g2] {
            assert!(k.commutator(g).interior_block(1).max_abs() <= 1e-12);
        }
    }
    let hb = derived_operator(b, Derived::HB, &p);
    let l3 = derived_operator(b, Derived::L3, &p);
    assert_eq!(hb.commutator(&l3).max_abs(), 0.0);
    for op in [&k1, &k2, &g1, &g2, &hb, &l3] {
        assert!(op.hermitian_flag());
    }
}

#[test]
fn landau_hamiltonian_from_momenta() {
    // H_B = (K1^2 + K2^2)/2 and L3 = (K1^2+K2^2)/2 - (G1^2+G2^2)/2 away from the edge
    let b = build_basis(10);
    let p = ModelParams::default();
    let k1 = derived_operator(b, Derived::K1, &p);
    let k2 = derived_operator(b, Derived::K2, &p);
    let g1 = derived_operator(b, Derived::G1, &p);
    let g2 = derived_operator(b, Derived::G2, &p);
    let hk = (&(&k1 * &k1) + &(&k2 * &k2)).scale_re(0.5);
    let hg = (&(&g1 * &g1) + &(&g2 * &g2)).scale_re(0.5);
    let hb = derived_operator(b, Derived::HB, &p);
    assert!(hk.interior_block(1).max_abs_diff(&hb.interior_block(1)) < 1e-12);
    let l3 = derived_operator(b, Derived::L3, &p);
    assert!((&hk - &hg).interior_block(1).max_abs_diff(&l3.interior_block(1)) < 1e-12);
}

#[test]
fn derived_diagonals() {
    let b = build_basis(12);
    let p = ModelParams { eps_b: 1.7, ..ModelParams::default() };
    let ix = |n1, n2| b.index_of(FockIndex::new(n1, n2)).unwrap();
    let q = derived_operator(b, Derived::QB, &p);
    for n in b.iter() {
        let i = b.index_of(n).unwrap();
        assert_eq!(q.get(i, i).re, (n.n1 + n.n2 + 2) as f64);
    }
    let h = derived_operator(b, Derived::HB, &p);
    assert!((h.get(ix(3, 7), ix(3, 7)).re - 1.7 * 3.5).abs() < 1e-15);
    let l3 = derived_operator(b, Derived::L3, &p);
    assert_eq!(l3.get(ix(2, 2), ix(2, 2)), c(0.0, 0.0));
    assert!("Y7".parse::<Derived>().is_err());
    assert_eq!("H_B".parse::<Derived>().unwrap(), Derived::HB);
}

#[test]
fn landau_projections() {
    let b = build_basis(2);
    let p0 = landau_projection(b, 0).unwrap();
    assert_eq!(p0.trace(), c(3.0, 0.0));
    for (n1, n2) in [(0, 0), (0, 1), (0, 2)] {
        let i = b.index_of(FockIndex::new(n1, n2)).unwrap();
        assert_eq!(p0.get(i, i), c(1.0, 0.0));
    }
    assert!(landau_projection(b, 3).is_err());

    let b = build_basis(15);
    let ap = ladder(b, Ladder::APlus);
    let am = ladder(b, Ladder::AMinus);
    for j in 0..6 {
        let pj = landau_projection(b, j).unwrap();
        assert_eq!((&pj * &pj).max_abs_diff(&pj), 0.0);
        assert_eq!(pj.adjoint().max_abs_diff(&pj), 0.0);
        for k in 0..6 {
            if k != j {
                assert_eq!((&pj * &landau_projection(b, k).unwrap()).max_abs(), 0.0);
            }
        }
        if j >= 1 {
            let prev = landau_projection(b, j - 1).unwrap();
            let shifted = (&(&ap * &prev) * &am).scale_re(1.0 / j as f64);
            assert!(shifted.interior_block(1).max_abs_diff(&pj.interior_block(1)) < 1e-12);
        }
    }
}

#[test]
fn flip_conjugation_and_time_reversal() {
    let b = build_basis(10);
    let p = ModelParams::default();
    let (f, conj, theta) = flip_and_conjugation(b);
    assert_eq!((&f * &f).max_abs_diff(&id(b)), 0.0);
    assert_eq!(theta.square_sign(), Some(1));
    assert_eq!(conj.square_sign(), Some(1));
    assert!(theta.unitarity_defect() < 1e-14);
    let hb = derived_operator(b, Derived::HB, &p);
    assert!(theta.conjugate_operator(&hb).max_abs_diff(&hb) < 1e-14);

    // F a F = -b on the whole truncation (F preserves shells)
    let a = [Ladder::APlus, Ladder::AMinus];
    let bb = [Ladder::BPlus, Ladder::BMinus];
    for (x, y) in a.iter().zip(bb.iter()) {
        let fa = &(&f * &ladder(b, *x)) * &f;
        assert!(fa.max_abs_diff(&-&ladder(b, *y)) < 1e-14);
    }

    let k1 = derived_operator(b, Derived::K1, &p);
    let k2 = derived_operator(b, Derived::K2, &p);
    let t1 = theta.conjugate_operator(&k1);
    let t2 = theta.conjugate_operator(&k2);
    assert!(t1.interior_block(1).max_abs_diff(&(-&k2).interior_block(1)) < 1e-12);
    assert!(t2.interior_block(1).max_abs_diff(&(-&k1).interior_block(1)) < 1e-12);
    // C and F commute
    let cf = conj.then_linear(&f).unitary_part;
    let fc = conj.unitary_part.matmul(&f.conj());
    assert!(cf.max_abs_diff(&fc) < 1e-14);
}

#[test]
fn spin_tensor_products() {
    let b = build_basis(6);
    let p = ModelParams::default();
    let t = derived_operator(b, Derived::K1, &p);
    let doubled = tensor_with_spin(&t, &spin_identity()).unwrap();
    assert_eq!(doubled.spin_dim(), 2);
    assert_eq!(doubled.spin_block(0, 0).unwrap().max_abs_diff(&t), 0.0);
    assert_eq!(doubled.spin_block(1, 1).unwrap().max_abs_diff(&t), 0.0);
    assert_eq!(doubled.spin_block(0, 1).unwrap().max_abs(), 0.0);

    let pj = landau_projection(b, 2).unwrap();
    let s3 = tensor_with_spin(&pj, &pauli(3)).unwrap();
    for n in b.iter() {
        let i = b.index_of(n).unwrap();
        let expect = if n.n1 == 2 { 1.0 } else { 0.0 };
        assert_eq!(s3.get(2 * i, 2 * i).re, expect);
        assert_eq!(s3.get(2 * i + 1, 2 * i + 1).re, -expect);
    }
    let m = [[c(0.3, 0.1), c(-1.0, 2.0)], [c(0.0, 0.5), c(2.0, -0.7)]];
    let h = derived_operator(b, Derived::HB, &p);
    let tr = tensor_with_spin(&h, &m).unwrap().trace();
    assert!((tr - h.trace() * (m[0][0] + m[1][1])).norm() < 1e-12);
    assert!(tensor_with_spin(&doubled, &m).is_err());
}

#[test]
fn interior_block_shapes() {
    let b = build_basis(9);
    let p = ModelParams::default();
    let k1 = derived_operator(b, Derived::K1, &p);
    assert_eq!(interior_block(&k1, 0).unwrap().max_abs_diff(&k1), 0.0);
    let blk = interior_block(&k1, 4).unwrap();
    assert_eq!(blk.basis().nmax(), 5);
    assert_eq!(blk.dim(), 21);
    assert!(interior_block(&k1, 10).is_err());
}

#[test]
fn dense_and_sparse_products_agree() {
    let b = build_basis(7);
    let p = ModelParams::default();
    let x1 = derived_operator(b, Derived::X1, &p);
    let k2 = derived_operator(b, Derived::K2, &p);
    let sp = &x1 * &k2;
    let dd = &x1.densified() * &k2.densified();
    let sd = &x1 * &k2.densified();
    let ds = &x1.densified() * &k2;
    assert!(sp.max_abs_diff(&dd) < 1e-13);
    assert!(sp.max_abs_diff(&sd) < 1e-13);
    assert!(sp.max_abs_diff(&ds) < 1e-13);
    assert!(!dd.is_sparse() && sp.is_sparse());
}

#[test]
fn serialization_layout() {
    let b = build_basis(3);
    let p = ModelParams::default();
    let k2 = derived_operator(b, Derived::K2, &p);
    let bytes = k2.to_bytes();
    assert_eq!(&bytes[0..8], &3u64.to_le_bytes());
    assert_eq!(&bytes[8..16], &1u64.to_le_bytes());
    assert_eq!(bytes.len(), 16 + 16 * 10 * 10);
    let back = OperatorMatrix::from_bytes(&bytes).unwrap();
    assert_eq!(back.max_abs_diff(&k2), 0.0);
    assert!(OperatorMatrix::from_bytes(&bytes[..20]).is_err());
}

fn random_op(b: TruncatedBasis, spin: usize, entries: &[(usize, usize, f64, f64)]) -> OperatorMatrix {
    let n = b.dim() * spin;
    let t: Vec<_> = entries.iter().map(|&(r, cc, x, y)| (r % n, cc % n, c(x, y))).collect();
    OperatorMatrix::from_triplets(b, spin, &t)
}

proptest! {
    #[test]
    fn basis_bijection(nmax in 0usize..200) {
        let b = build_basis(nmax);
        prop_assert_eq!(b.dim(), (nmax + 1) * (nmax + 2) / 2);
        for (i, n) in b.iter().enumerate() {
            prop_assert_eq!(b.index_of(n), Some(i));
            prop_assert_eq!(b.index(i), n);
        }
        for l in 0..=nmax {
            prop_assert_eq!(b.shell_range(l).len(), l + 1);
        }
    }

    #[test]
    fn serialization_roundtrip(nmax in 0usize..5, spin in 1usize..3,
        entries in proptest::collection::vec((0usize..64, 0usize..64, -5.0f64..5.0, -5.0f64..5.0), 0..40)) {
        let op = random_op(build_basis(nmax), spin, &entries);
        let back = OperatorMatrix::from_bytes(&op.to_bytes()).unwrap();
        prop_assert_eq!(back.max_abs_diff(&op), 0.0);
        prop_assert_eq!(back.spin_dim(), spin);
    }

    #[test]
    fn adjoint_reverses_products(
        e1 in proptest::collection::vec((0usize..64, 0usize..64, -2.0f64..2.0, -2.0f64..2.0), 0..30),
        e2 in proptest::collection::vec((0usize..64, 0usize..64, -2.0f64..2.0, -2.0f64..2.0), 0..30)) {
        let b = build_basis(4);
        let x = random_op(b, 1, &e1);
        let y = random_op(b, 1, &e2);
        let lhs = (&x * &y).adjoint();
        let rhs = &y.adjoint() * &x.adjoint();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let dense = &x.densified() * &y.densified();
        prop_assert!((&x * &y).max_abs_diff(&dense) < 1e-12);
    }
}
