use ippa_core::numkit::{
    orthonormal_transform, power_iteration, svd, vecops, DenseMatrix, MeasurementOp, SeededRng,
    TransformKind,
};
use ippa_core::prox::{
    shrink, soft_threshold, svt, BoxIndicator, DiagQuadraticBox, L1Norm, ProxOracle, Quadratic,
};
use proptest::prelude::*;

const KINDS: [TransformKind; 3] = [TransformKind::Dct2, TransformKind::Wht, TransformKind::Fft2];

fn shape(kind: TransformKind) -> (usize, usize) {
    match kind {
        TransformKind::Wht => (8, 16),
        _ => (12, 10),
    }
}

#[test]
fn measurement_ops_are_coisometries() {
    let mut rng = SeededRng::new(1);
    for kind in KINDS {
        let (r, c) = shape(kind);
        let q = if kind == TransformKind::Fft2 { 40 } else { 70 };
        let op = MeasurementOp::random(kind, r, c, q, &mut rng).unwrap();
        let len = op.measurement_len();
        for _ in 0..50 {
            let b = rng.normal_vec(len);
            let back = op.apply(&op.adjoint(&b).unwrap()).unwrap();
            assert!(vecops::max_abs_diff(&back, &b) <= 1e-12, "{kind}");
            assert!(op.adjoint(&b).unwrap().frobenius_norm() <= vecops::norm(&b) * (1.0 + 1e-12));
        }
        let rho = power_iteration(
            r * c,
            |x| {
                let m = DenseMatrix::from_vec(r, c, x.to_vec()).unwrap();
                op.adjoint(&op.apply(&m).unwrap()).unwrap().into_vec()
            },
            200,
            &mut rng,
        );
        assert!((rho - 1.0).abs() < 1e-6, "{kind}: {rho}");
    }
}

#[test]
fn real_transforms_preserve_norm() {
    let mut rng = SeededRng::new(2);
    for kind in [TransformKind::Dct2, TransformKind::Wht] {
        let (r, c) = shape(kind);
        for _ in 0..20 {
            let x = rng.normal_matrix(r, c);
            let t = orthonormal_transform(kind, &x, false).unwrap();
            assert!((t.frobenius_norm() - x.frobenius_norm()).abs() <= 1e-12 * x.frobenius_norm());
        }
    }
}

fn small_matrix() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..9, 1usize..9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn singular_values_are_orthogonally_invariant((seed, r, c) in small_matrix()) {
        let mut rng = SeededRng::new(seed);
        let m = rng.normal_matrix(r, c);
        let u = rng.orthogonal_matrix(r);
        let v = rng.orthogonal_matrix(c);
        let rotated = u.matmul(&m).unwrap().matmul(&v).unwrap();
        let s1 = svd(&m).unwrap().s;
        let s2 = svd(&rotated).unwrap().s;
        prop_assert!(vecops::max_abs_diff(&s1, &s2) <= 1e-8);
    }

    #[test]
    fn svd_reconstructs((seed, r, c) in small_matrix()) {
        let mut rng = SeededRng::new(seed);
        let m = rng.normal_matrix(r, c);
        let d = svd(&m).unwrap();
        prop_assert!(d.reconstruct().max_abs_diff(&m) <= 1e-10);
        prop_assert!(d.s.windows(2).all(|w| w[0] >= w[1]) && d.s.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn svt_commutes_with_orthogonal_conjugation((seed, r, c) in small_matrix(), kappa in 0.01f64..3.0) {
        let mut rng = SeededRng::new(seed);
        let m = rng.normal_matrix(r, c);
        let u = rng.orthogonal_matrix(r);
        let v = rng.orthogonal_matrix(c);
        let lhs = svt(&u.matmul(&m).unwrap().matmul(&v).unwrap(), kappa).unwrap();
        let rhs = u.matmul(&svt(&m, kappa).unwrap()).unwrap().matmul(&v).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-8);
    }

    #[test]
    fn svt_spectrum_is_shrunk((seed, r, c) in small_matrix(), kappa in 0.01f64..3.0) {
        let mut rng = SeededRng::new(seed);
        let m = rng.normal_matrix(r, c);
        let expected: Vec<f64> = svd(&m).unwrap().s.iter().map(|&s| (s - kappa).max(0.0)).collect();
        let got = svd(&svt(&m, kappa).unwrap()).unwrap().s;
        prop_assert!(vecops::max_abs_diff(&expected, &got) <= 1e-10);
    }

    #[test]
    fn soft_threshold_is_firmly_nonexpansive(
        x in proptest::collection::vec(-10.0f64..10.0, 6),
        y in proptest::collection::vec(-10.0f64..10.0, 6),
        kappa in 0.0f64..5.0,
    ) {
        let (px, py) = (soft_threshold(&x, kappa), soft_threshold(&y, kappa));
        let d = vecops::sub(&px, &py);
        prop_assert!(vecops::norm_sq(&d) <= vecops::dot(&d, &vecops::sub(&x, &y)) + 1e-12);
        for (a, b) in x.iter().zip(&px) {
            prop_assert_eq!(*b, shrink(*a, kappa));
            prop_assert!(b.abs() <= a.abs());
        }
    }

    #[test]
    fn prox_inequality_holds(seed in any::<u64>(), kappa in 0.05f64..5.0) {
        let mut rng = SeededRng::new(seed);
        let n = 5;
        let g = rng.normal_matrix(n, n);
        let q = g.t_matmul(&g).unwrap();
        let oracles: Vec<Box<dyn ProxOracle>> = vec![
            Box::new(L1Norm { dim: n, weight: 0.7 }),
            Box::new(Quadratic::new(q, rng.normal_vec(n), 0.0).unwrap()),
            Box::new(BoxIndicator { lo: vec![-0.5; n], hi: vec![1.0; n] }),
            Box::new(DiagQuadraticBox::new(vec![2.0; n], rng.normal_vec(n), vec![-1.0; n], vec![0.3; n]).unwrap()),
        ];
        for o in &oracles {
            let z = vecops::scale(3.0, &rng.normal_vec(n));
            let p = o.prox(&z, kappa);
            let fp = o.value(&p);
            prop_assert!(fp.is_finite());
            for _ in 0..100 {
                let w = o.project(&vecops::add(&p, &rng.uniform_vec(-10.0, 10.0, n).unwrap()));
                // κφ(w) ≥ κφ(p) + ⟨z − p, w − p⟩
                let rhs = kappa * fp + vecops::dot(&vecops::sub(&z, &p), &vecops::sub(&w, &p));
                prop_assert!(kappa * o.value(&w) >= rhs - 1e-8 * (1.0 + rhs.abs()));
            }
        }
    }
}
