use ippa_core::numkit::{solve, vecops, DenseMatrix, SeededRng};
use ippa_core::prox::Quadratic;
use ippa_core::vi_core::*;
use proptest::prelude::*;

/// `F(w) = Mw + r` with `sym(M) ⪰ μI`, no θ, unconstrained.
fn strongly_monotone(rng: &mut SeededRng, n: usize, mu: f64) -> AffineVi {
    let a = rng.normal_matrix(n, n);
    let s = rng.normal_matrix(n, n);
    let mut m = &a.t_matmul(&a).unwrap().scale(0.2) + &(&s - &s.transpose());
    for i in 0..n {
        m[(i, i)] += mu;
    }
    AffineVi::unconstrained(DenseMatrix::zeros(n, n), vec![0.0; n], m, rng.normal_vec(n)).unwrap()
}

fn boxed(rng: &mut SeededRng, n: usize) -> AffineVi {
    let s = rng.normal_matrix(n, n);
    let mut m = &s - &s.transpose();
    for i in 0..n {
        m[(i, i)] += 0.3;
    }
    let b = rng.normal_matrix(n, n);
    let q = b.t_matmul(&b).unwrap().scale(0.5);
    AffineVi::new(
        q,
        rng.normal_vec(n),
        m,
        rng.normal_vec(n),
        vec![-0.3; n],
        vec![0.4; n],
    )
    .unwrap()
}

fn spd_weight(rng: &mut SeededRng, n: usize) -> DenseWeight {
    let g = rng.normal_matrix(n, n);
    let mut w = g.t_matmul(&g).unwrap().scale(1.0 / n as f64);
    for i in 0..n {
        w[(i, i)] += 0.5;
    }
    DenseWeight::new(w).unwrap()
}

#[test]
fn affine_run_reaches_direct_solution() {
    let mut rng = SeededRng::new(100);
    let p = strongly_monotone(&mut rng, 2, 1.0);
    let m = p.operator(&[1.0, 0.0]);
    let r = p.operator(&[0.0, 0.0]);
    let mcol0 = vecops::sub(&m, &r);
    let mcol1 = vecops::sub(&p.operator(&[0.0, 1.0]), &r);
    let mm = DenseMatrix::from_rows(&[vec![mcol0[0], mcol1[0]], vec![mcol0[1], mcol1[1]]]).unwrap();
    let w_star = solve(&mm, &vecops::scale(-1.0, &r)).unwrap();

    let g = ScaledIdentity::identity(2);
    let s = InertialSchedule::constant(0.28, 1.0).unwrap();
    let stop = StopRule {
        tol: 1e-12,
        max_iter: 5000,
    };
    let tr = run_inertial_ppa(&p, &g, &s, &[5.0, -3.0], stop, None).unwrap();
    assert!(tr.converged);
    assert!(vecops::dist(tr.last(), &w_star) < 1e-6);
}

#[test]
fn zero_inertia_reproduces_classical_ppa_bitwise() {
    let mut rng = SeededRng::new(101);
    let p = boxed(&mut rng, 4);
    let g = spd_weight(&mut rng, 4);
    let s = InertialSchedule::classical(0.7).unwrap();
    let w0 = vec![0.1, -0.2, 0.3, 0.0];
    let tr = run_inertial_ppa(&p, &g, &s, &w0, StopRule::fixed(60), None).unwrap();
    let mut w = w0.clone();
    for k in 0..60 {
        w = p.resolvent(&w, 0.7, &g).unwrap();
        assert_eq!(w, tr.iterates[k + 1]);
    }
}

#[test]
fn resolvent_satisfies_regularized_vi() {
    let mut rng = SeededRng::new(102);
    for _ in 0..10 {
        let p = boxed(&mut rng, 5);
        let g = spd_weight(&mut rng, 5);
        let w_k = p.project(&rng.normal_vec(5));
        let w_km1 = p.project(&rng.normal_vec(5));
        let (bar, next) = inertial_ppa_step(&p, &g, &w_k, &w_km1, 0.25, 0.8).unwrap();
        assert!(p.contains(&next));
        let probes = sample_probes(&p, &next, 100, 10.0, &mut rng).unwrap();
        assert!(vi_slack(&p, &g, &bar, &next, 0.8, &probes) >= -1e-8);
        assert_eq!(
            vi_slack(&p, &g, &bar, &next, 0.8, std::slice::from_ref(&next)),
            0.0
        );
    }
}

#[test]
fn inertial_rate_bound_on_affine_fixtures() {
    let mut rng = SeededRng::new(103);
    for trial in 0..10 {
        let p = if trial % 2 == 0 {
            strongly_monotone(&mut rng, 2, 0.5)
        } else {
            boxed(&mut rng, 4)
        };
        let n = p.dim();
        let w_star = p.solve_direct().unwrap();
        let g = spd_weight(&mut rng, n);
        let s = InertialSchedule::constant(0.28, 1.0).unwrap();
        let w0 = p.project(&vecops::scale(3.0, &rng.normal_vec(n)));
        let tr = run_inertial_ppa(&p, &g, &s, &w0, StopRule::fixed(200), Some(&w_star)).unwrap();
        assert!(tr.is_consistent());
        let rep = check_inertial_rate_bound(&tr, &g, &w_star).unwrap();
        assert!((rep.constant - 13.5).abs() < 1e-12);
        assert!(rep.holds(), "trial {trial}: {:?}", rep.first_violation);
        let fejer = check_fejer_bound(&tr).unwrap();
        assert!(fejer.holds(), "trial {trial}: excess {}", fejer.max_excess);
    }
}

#[test]
fn nondecreasing_schedule_stays_in_regime() {
    let mut rng = SeededRng::new(104);
    let p = strongly_monotone(&mut rng, 3, 0.2);
    let w_star = p.solve_direct().unwrap();
    let g = ScaledIdentity::identity(3);
    let s = InertialSchedule::new(
        AlphaRule::NondecreasingCapped(0.3),
        LambdaRule::Constant(2.0),
    )
    .unwrap();
    let tr = run_inertial_ppa(
        &p,
        &g,
        &s,
        &[1.0, 2.0, 3.0],
        StopRule::fixed(500),
        Some(&w_star),
    )
    .unwrap();
    assert!(tr.alphas.windows(2).all(|a| a[0] <= a[1]) && tr.alphas.iter().all(|&a| a < 0.3));
    let rep = check_inertial_rate_bound(&tr, &g, &w_star).unwrap();
    assert!(rep.holds());
    assert!(rep.k_min_residual[499] < rep.k_min_residual[9]);
}

#[test]
fn summable_guard_bounds_series_and_converges() {
    let mut rng = SeededRng::new(105);
    let p = strongly_monotone(&mut rng, 3, 0.1);
    let w_star = p.solve_direct().unwrap();
    let g = ScaledIdentity::identity(3);
    let c = 1.0;
    let s = InertialSchedule::new(
        AlphaRule::SummableGuard { cap: 0.9, c },
        LambdaRule::Constant(1.0),
    )
    .unwrap();
    let tr =
        run_inertial_ppa(&p, &g, &s, &[10.0, -10.0, 4.0], StopRule::fixed(2000), None).unwrap();
    let series: f64 = tr.delta.iter().map(|d| d / 2.0).sum();
    assert!(series <= c * std::f64::consts::PI.powi(2) / 6.0);
    for (k, d) in tr.delta.iter().enumerate() {
        assert!(d / 2.0 <= c / (k.max(1) * k.max(1)) as f64 * (1.0 + 1e-12));
    }
    assert!(vecops::dist(tr.last(), &w_star) < 1e-8);
}

#[test]
fn h_monotonicity_probe() {
    let mut rng = SeededRng::new(106);
    for _ in 0..5 {
        let p = boxed(&mut rng, 4);
        let center = p.project(&rng.normal_vec(4));
        assert!(h_monotonicity_margin(&p, &center, 100, &mut rng).unwrap() >= -1e-10);
        let q = strongly_monotone(&mut rng, 3, 0.5);
        assert!(h_monotonicity_margin(&q, &[0.0; 3], 100, &mut rng).unwrap() >= -1e-10);
    }
    let l1 = L1RegularizedVi::new(0.3, 2.0, vec![1.0, -2.0]).unwrap();
    assert!(h_monotonicity_margin(&l1, &[0.0, 0.0], 100, &mut rng).unwrap() >= -1e-10);
}

#[test]
fn weight_plus_h_is_positive_definite() {
    let mut rng = SeededRng::new(107);
    let p = strongly_monotone(&mut rng, 4, 0.3);
    let g = ScaledIdentity { dim: 4, scale: 0.0 };
    let h = p.h_weight().unwrap();
    for _ in 0..100 {
        let v = rng.normal_vec(4);
        let v = vecops::scale(1.0 / vecops::norm(&v), &v);
        assert!(g.quad(&v) + h.quad(&v) >= 0.3 - 1e-12);
    }
}

#[test]
fn l1_problem_runs_to_closed_form() {
    let p = L1RegularizedVi::new(0.5, 1.0, vec![3.0, 0.2, -1.0]).unwrap();
    let w_star = p.solution().unwrap();
    let g = ScaledIdentity::identity(3);
    let s = InertialSchedule::constant(0.3, 1.0).unwrap();
    let stop = StopRule {
        tol: 1e-14,
        max_iter: 1000,
    };
    let tr = run_inertial_ppa(&p, &g, &s, &[0.0; 3], stop, Some(&w_star)).unwrap();
    assert!(tr.converged);
    assert!(vecops::dist(tr.last(), &w_star) < 1e-12);
    assert!(check_inertial_rate_bound(&tr, &g, &w_star).unwrap().holds());
}

#[test]
fn nesterov_objective_rate_on_quadratic() {
    let mut rng = SeededRng::new(108);
    let c = rng.normal_vec(10);
    let f = Quadratic::squared_distance(&c);
    let w0 = vec![0.0; 10];
    let tr = nesterov_ippa(&f, &LambdaRule::Constant(1.0), &w0, 500).unwrap();
    let obj = tr.objective.as_ref().unwrap();
    let bound = 4.0 * vecops::norm_sq(&vecops::sub(&w0, &c));
    for (k, v) in obj.iter().enumerate().take(501).skip(1) {
        assert!((k * k) as f64 * v <= bound);
    }
    let alphas = &tr.alphas;
    assert!(alphas.windows(2).all(|a| a[0] <= a[1]));
    assert!(alphas[499] > 0.99);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nesterov_k_squared_gap_is_bounded(seed in any::<u64>(), lam in 0.1f64..5.0) {
        let mut rng = SeededRng::new(seed);
        let c = rng.normal_vec(10);
        let w0 = vecops::scale(3.0, &rng.normal_vec(10));
        let f = Quadratic::squared_distance(&c);
        let tr = nesterov_ippa(&f, &LambdaRule::Constant(lam), &w0, 200).unwrap();
        let obj = tr.objective.unwrap();
        let d0 = vecops::norm_sq(&vecops::sub(&w0, &c));
        for (k, v) in obj.iter().enumerate().take(201).skip(1) {
            prop_assert!((k * k) as f64 * v <= 4.0 * d0 / lam.min(1.0));
        }
    }

    #[test]
    fn inertial_rate_holds_for_random_constant_alpha(seed in any::<u64>(), alpha in 0.0f64..0.33) {
        let mut rng = SeededRng::new(seed);
        let p = strongly_monotone(&mut rng, 3, 0.2);
        let w_star = p.solve_direct().unwrap();
        let g = spd_weight(&mut rng, 3);
        let s = InertialSchedule::constant(alpha, 1.0).unwrap();
        let w0 = vecops::scale(5.0, &rng.normal_vec(3));
        let tr = run_inertial_ppa(&p, &g, &s, &w0, StopRule::fixed(150), Some(&w_star)).unwrap();
        let rep = check_inertial_rate_bound(&tr, &g, &w_star).unwrap();
        prop_assert!(rep.holds());
        prop_assert!(check_fejer_bound(&tr).unwrap().holds());
    }

    #[test]
    fn summable_alpha_within_cap(k in 1usize..10_000, diff in 0.0f64..1e6, cap in 0.0f64..0.99, c in 0.01f64..10.0) {
        let a = summable_alpha(k, diff, cap, c);
        prop_assert!(a >= 0.0 && a <= cap);
        prop_assert!(a * diff <= c / (k * k) as f64 * (1.0 + 1e-12));
    }
}
