use ippa_core::cpcp::*;
use ippa_core::numkit::{svd, vecops, DenseMatrix, SeededRng, TransformKind};
use ippa_core::prox::{shrink, svt};
use ippa_core::vi_core::{AlphaRule, SolverTrace, StopRule};

const TAU: f64 = 0.9;
const ETA: f64 = 0.9;

fn small(seed: u64) -> CpcpInstance {
    let spec = CpcpSpec::from_ratios(32, 32, 2, 0.03, 0.8, TransformKind::Dct2, seed).unwrap();
    generate_instance(spec).unwrap()
}

fn nuclear(m: &DenseMatrix) -> f64 {
    svd(m).unwrap().s.iter().sum()
}

fn random_state(inst: &CpcpInstance, rng: &mut SeededRng, beta: f64) -> CpcpState {
    let (m, n) = (inst.spec.m, inst.spec.n);
    CpcpState {
        l: rng.normal_matrix(m, n),
        s: rng.normal_matrix(m, n),
        p: rng.normal_vec(inst.q()),
        beta,
        iter: 0,
    }
}

/// Literal transcription of the L → p → S iteration.
fn naive_step(inst: &CpcpInstance, beta: f64, w: &CpcpState) -> CpcpState {
    let a = &inst.meas;
    let (tau, eta) = (TAU, ETA);
    let u = a
        .adjoint(&vecops::sub(&a.apply(&(&w.l + &w.s)).unwrap(), &inst.b))
        .unwrap();
    let atp = a.adjoint(&w.p).unwrap();
    let zl = &(&w.l - &u.scale(tau)) + &atp.scale(tau / beta);
    let l = svt(&zl, tau / beta).unwrap();
    let resid = vecops::sub(&a.apply(&(&l + &w.s)).unwrap(), &inst.b);
    let p = vecops::sub(&w.p, &vecops::scale(beta, &resid));
    let v = a.adjoint(&resid).unwrap();
    let atp = a.adjoint(&p).unwrap();
    let zs = &(&w.s - &v.scale(eta)) + &atp.scale(eta / beta);
    let data = zs
        .as_slice()
        .iter()
        .map(|&x| shrink(x, inst.lambda * eta / beta))
        .collect();
    CpcpState {
        s: DenseMatrix::from_vec(zs.rows(), zs.cols(), data).unwrap(),
        l,
        p,
        beta,
        iter: w.iter + 1,
    }
}

fn state_diff(a: &CpcpState, b: &CpcpState) -> f64 {
    a.l.max_abs_diff(&b.l)
        .max(a.s.max_abs_diff(&b.s))
        .max(vecops::max_abs_diff(&a.p, &b.p))
}

/// `‖d‖²_G` with `x = L`, `y = S`, `A = B = 𝒜`.
fn g_norm_sq(
    inst: &CpcpInstance,
    beta: f64,
    d_l: &DenseMatrix,
    d_s: &DenseMatrix,
    d_p: &[f64],
) -> f64 {
    let a = &inst.meas;
    beta * (vecops::norm_sq(d_l.as_slice()) / TAU - vecops::norm_sq(&a.apply(d_l).unwrap()))
        + beta / ETA * vecops::norm_sq(d_s.as_slice())
        - 2.0 * vecops::dot(&a.apply(d_s).unwrap(), d_p)
        + vecops::norm_sq(d_p) / beta
}

#[test]
fn spec_sizes() {
    let spec = CpcpSpec {
        m: 10,
        n: 10,
        r: 2,
        nnz: 5,
        kind: TransformKind::Dct2,
        q: 50,
        seed: 0,
    };
    assert_eq!(spec.dof(), 41);
    let big = CpcpSpec {
        m: 1024,
        n: 1024,
        ..spec
    };
    assert_eq!(big.lambda(), 0.03125);

    let desk = CpcpSpec::from_ratios(256, 256, 5, 0.05, 0.6, TransformKind::Dct2, 0).unwrap();
    assert_eq!(desk.q, 39321);
    assert!(
        (desk.q_over_dof() - 6.77).abs() < 0.01,
        "{}",
        desk.q_over_dof()
    );

    let fft = CpcpSpec::from_ratios(16, 16, 2, 0.05, 0.3, TransformKind::Fft2, 0).unwrap();
    assert_eq!(fft.q % 2, 0);
    assert_eq!(generate_instance(fft).unwrap().q(), fft.q);
}

#[test]
fn invalid_specs_are_rejected() {
    let ok = CpcpSpec::from_ratios(16, 16, 2, 0.05, 0.5, TransformKind::Dct2, 0).unwrap();
    for bad in [
        CpcpSpec { r: 17, ..ok },
        CpcpSpec { r: 0, ..ok },
        CpcpSpec { nnz: 257, ..ok },
        CpcpSpec { q: 0, ..ok },
        CpcpSpec { q: 257, ..ok },
        CpcpSpec {
            kind: TransformKind::Fft2,
            q: 31,
            ..ok
        },
    ] {
        assert!(generate_instance(bad).is_err(), "{bad:?}");
    }
    assert!(CpcpSpec::from_ratios(16, 16, 2, 0.0, 0.5, TransformKind::Dct2, 0).is_err());
    assert!(CpcpSpec::from_ratios(16, 16, 2, 0.1, 1.5, TransformKind::Dct2, 0).is_err());
}

#[test]
fn instances_are_deterministic_and_roundtrip() {
    for kind in [TransformKind::Dct2, TransformKind::Wht, TransformKind::Fft2] {
        let spec = CpcpSpec::from_ratios(16, 32, 3, 0.05, 0.4, kind, 77).unwrap();
        let a = generate_instance(spec).unwrap();
        let b = generate_instance(spec).unwrap();
        assert_eq!(a.l0, b.l0);
        assert_eq!(a.s0, b.s0);
        assert_eq!(a.b, b.b);
        assert_eq!(a.meas.indices(), b.meas.indices());

        let json = serde_json::to_string(&a.record()).unwrap();
        let rec: InstanceRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(rec, a.record());
        let back = CpcpInstance::from_record(&rec).unwrap();
        assert_eq!(back.b, a.b);

        let mut tampered = rec.clone();
        tampered.indices.swap(0, 1);
        assert!(CpcpInstance::from_record(&tampered).is_err());

        let other = generate_instance(CpcpSpec { seed: 78, ..spec }).unwrap();
        assert_ne!(other.b, a.b);
    }
}

#[test]
fn ground_truth_has_requested_structure() {
    for seed in 0..3 {
        let inst = small(seed);
        let r = inst.spec.r;
        let s = svd(&inst.l0).unwrap().s;
        assert!(s[r - 1] > 1e-6 * s[0]);
        assert!(s[r] < 1e-10 * s[0]);
        assert_eq!(inst.s0.count_nonzero(), inst.spec.nnz);
        assert!(inst.s0.as_slice().iter().all(|v| v.abs() <= 10.0));
        let direct = inst.meas.apply(&(&inst.l0 + &inst.s0)).unwrap();
        assert_eq!(direct, inst.b);
        assert_eq!(inst.lambda, 1.0 / 32f64.sqrt());
    }
}

#[test]
fn zero_measurements_stop_immediately() {
    let mut inst = small(1);
    inst.b.iter_mut().for_each(|b| *b = 0.0);
    let ctrl = BetaController::for_instance(&inst);
    assert_eq!(ctrl.beta, BETA_MAX);
    let (state, trace) = ladmm_cpcp(&inst, TAU, ETA, ctrl, StopRule::default()).unwrap();
    assert!(trace.converged);
    assert_eq!(trace.iterations, 1);
    assert_eq!(state.norm(), 0.0);
}

#[test]
fn solver_matches_literal_iteration() {
    let inst = small(2);
    let beta = 0.5;
    let stop = StopRule {
        tol: 0.0,
        max_iter: 40,
    };
    let ctrl = BetaController::fixed(beta).unwrap();
    let (state, trace) = ladmm_cpcp(&inst, TAU, ETA, ctrl, stop).unwrap();
    assert_eq!(trace.iterations, 40);

    let mut w = CpcpState::zeros(&inst, beta);
    for _ in 0..40 {
        let next = naive_step(&inst, beta, &w);
        assert!(state_diff(&next, &cpcp_step(&inst, TAU, ETA, beta, &w).unwrap()) < 1e-12);
        w = next;
    }
    assert!(state_diff(&state, &w) < 1e-10, "{}", state_diff(&state, &w));

    let (inertial, itrace) =
        iladmm_cpcp(&inst, TAU, ETA, AlphaRule::Constant(0.0), ctrl, stop).unwrap();
    assert!(state_diff(&inertial, &state) <= 1e-14);
    assert_eq!(itrace.stop_residuals, trace.stop_residuals);
}

#[test]
fn inertial_step_starts_from_extrapolated_point() {
    let inst = small(3);
    let beta = 0.5;
    let alpha = 0.25;
    let ctrl = BetaController::fixed(beta).unwrap();
    let (state, trace) = iladmm_cpcp(
        &inst,
        TAU,
        ETA,
        AlphaRule::Constant(alpha),
        ctrl,
        StopRule {
            tol: 0.0,
            max_iter: 15,
        },
    )
    .unwrap();
    let mut prev = CpcpState::zeros(&inst, beta);
    let mut cur = prev.clone();
    for _ in 0..15 {
        let bar = CpcpState {
            l: &cur.l + &(&cur.l - &prev.l).scale(alpha),
            s: &cur.s + &(&cur.s - &prev.s).scale(alpha),
            p: vecops::extrapolate(&cur.p, &prev.p, alpha),
            beta,
            iter: cur.iter,
        };
        prev = std::mem::replace(&mut cur, naive_step(&inst, beta, &bar));
    }
    assert!(
        state_diff(&state, &cur) < 1e-9,
        "{}",
        state_diff(&state, &cur)
    );
    assert_eq!(trace.alphas, vec![alpha; 15]);
}

#[test]
fn l_update_solves_its_subproblem() {
    let inst = small(4);
    let mut rng = SeededRng::new(5);
    let (beta, tau) = (0.7, TAU);
    let w = random_state(&inst, &mut rng, beta);
    let next = cpcp_step(&inst, TAU, ETA, beta, &w).unwrap();
    let a = &inst.meas;
    let u = a
        .adjoint(&vecops::sub(&a.apply(&(&w.l + &w.s)).unwrap(), &inst.b))
        .unwrap();
    let center = &w.l - &u.scale(tau);
    // ‖L‖_* − ⟨p, 𝒜L⟩ + (β/2τ)‖L − (Lᵏ − τUᵏ)‖²
    let phi = |l: &DenseMatrix| {
        nuclear(l) - vecops::dot(&w.p, &a.apply(l).unwrap())
            + beta / (2.0 * tau) * vecops::norm_sq((l - &center).as_slice())
    };
    let best = phi(&next.l);
    for i in 0..50 {
        let scale = 10f64.powi(-(i % 5) - 1);
        let e = rng.normal_matrix(inst.spec.m, inst.spec.n).scale(scale);
        assert!(phi(&(&next.l + &e)) >= best - 1e-10 * (1.0 + best.abs()));
    }

    // Y = 𝒜*(p) − (β/τ)(L⁺ − L + τU) is a subgradient of ‖·‖_* at L⁺
    let y = &a.adjoint(&w.p).unwrap() - &(&(&next.l - &w.l) + &u.scale(tau)).scale(beta / tau);
    assert!(svd(&y).unwrap().s[0] <= 1.0 + 1e-8);
    let kappa = tau / beta;
    let back = svt(&(&next.l + &y.scale(kappa)), kappa).unwrap();
    assert!(back.max_abs_diff(&next.l) < 1e-9);
    assert!((nuclear(&next.l) - y.inner(&next.l)).abs() < 1e-8 * (1.0 + nuclear(&next.l)));
}

#[test]
fn beta_rule_examples() {
    // r = β·resid²/(2s·obj) with obj = 1, s = 1
    let mut c = BetaController::new(1.0).unwrap();
    assert_eq!(c.ratio(0.1, 1.0), 0.05);
    assert_eq!(c.observe(0.1, 1.0), 0.5);
    let mut c = BetaController::new(1.0).unwrap();
    assert_eq!(c.observe(12.0, 1.0), 2.0);
    let mut c = BetaController::new(1e-3).unwrap();
    assert_eq!(c.observe(100.0, 1.0), 1e-3);
    let mut c = BetaController::new(1.0).unwrap();
    assert_eq!(c.observe(2.0, 1.0), 1.0);
    let mut c = BetaController::new(50.0).unwrap();
    assert_eq!(c.observe(1.0, 1e-3), BETA_MAX);
    assert_eq!(BetaController::new(1e5).unwrap().beta, BETA_MAX);
    assert!(BetaController::new(0.0).is_err());

    let mut c = BetaController::new(1.0).unwrap().with_scale(10.0).unwrap();
    assert_eq!(c.observe(12.0, 1.0), 1.0);
    assert_eq!(c.ratio(0.0, 0.0), 0.0);

    let mut c = BetaController::new(1.0).unwrap();
    for _ in 0..BETA_TUNING_ITERS {
        c.observe(0.0, 1.0);
    }
    assert!(!c.active);
    assert_eq!(c.beta, BETA_MIN);
    let frozen = c.beta;
    assert_eq!(c.observe(0.0, 1.0), frozen);

    let inst = small(6);
    let ctrl = BetaController::for_instance(&inst);
    assert!((ctrl.beta - 0.1 * inst.q() as f64 / vecops::sum_abs(&inst.b)).abs() < 1e-15);
}

#[test]
fn beta_stays_in_bounds_and_freezes() {
    let inst = small(7);
    let (_, trace) = ladmm_cpcp(
        &inst,
        TAU,
        ETA,
        BetaController::for_instance(&inst),
        StopRule {
            tol: 0.0,
            max_iter: 60,
        },
    )
    .unwrap();
    assert!(trace
        .lambdas
        .iter()
        .all(|&b| (BETA_MIN..=BETA_MAX).contains(&b)));
    let tail = &trace.lambdas[BETA_TUNING_ITERS + 1..];
    assert!(tail.iter().all(|&b| b == tail[0]));
}

#[test]
fn stopping_residual_examples() {
    let inst = small(8);
    let mut rng = SeededRng::new(9);
    let w = random_state(&inst, &mut rng, 1.0);
    assert_eq!(stopping_residual(&w, &w), 0.0);

    let two = generate_instance(CpcpSpec {
        m: 2,
        n: 2,
        r: 1,
        nnz: 1,
        kind: TransformKind::Dct2,
        q: 2,
        seed: 0,
    })
    .unwrap();
    let zero = CpcpState::zeros(&two, 1.0);
    let next = CpcpState {
        l: DenseMatrix::identity(2),
        ..zero.clone()
    };
    assert!((stopping_residual(&next, &zero) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn recovery_metrics_examples() {
    let inst = small(10);
    let exact = CpcpState {
        l: inst.l0.clone(),
        s: inst.s0.clone(),
        ..CpcpState::zeros(&inst, 1.0)
    };
    let m = recovery_metrics(&inst, &exact, &SolverTrace::default()).unwrap();
    assert_eq!((m.rel_l, m.rel_s), (0.0, 0.0));
    assert!(m.feasibility < 1e-14);
    assert!(!m.expected_failure);

    let zero = CpcpState::zeros(&inst, 1.0);
    let m = recovery_metrics(&inst, &zero, &SolverTrace::default()).unwrap();
    assert!((m.rel_l - 1.0).abs() < 1e-15 && (m.rel_s - 1.0).abs() < 1e-15);
    assert!((m.feasibility - 1.0).abs() < 1e-15);

    let thin = generate_instance(
        CpcpSpec::from_ratios(32, 32, 5, 0.05, 0.3, TransformKind::Dct2, 0).unwrap(),
    )
    .unwrap();
    assert!(thin.q_over_dof() < RECOVERY_Q_OVER_DOF);
    let m = recovery_metrics(
        &thin,
        &CpcpState::zeros(&thin, 1.0),
        &SolverTrace::default(),
    )
    .unwrap();
    assert!(m.expected_failure);
}

#[test]
fn converged_runs_are_feasible() {
    let tol = 1e-5;
    for seed in 0..3 {
        let inst = small(20 + seed);
        let (state, trace) = ladmm_cpcp(
            &inst,
            0.99,
            0.99,
            BetaController::fixed(0.5).unwrap(),
            StopRule {
                tol,
                max_iter: 2000,
            },
        )
        .unwrap();
        assert!(trace.converged);
        let m = recovery_metrics(&inst, &state, &trace).unwrap();
        assert!(
            m.feasibility <= 10.0 * tol,
            "seed {seed}: {}",
            m.feasibility
        );
    }
}

#[test]
fn fixed_beta_iterates_contract_in_g_norm() {
    let inst = small(11);
    let beta = 0.5;
    let mut prev = CpcpState::zeros(&inst, beta);
    let mut cur = cpcp_step(&inst, TAU, ETA, beta, &prev).unwrap();
    let mut last = f64::INFINITY;
    for _ in 0..150 {
        let d = g_norm_sq(
            &inst,
            beta,
            &(&cur.l - &prev.l),
            &(&cur.s - &prev.s),
            &vecops::sub(&cur.p, &prev.p),
        );
        assert!(d >= -1e-12);
        assert!(d <= last * (1.0 + 1e-10) + 1e-20, "{d} > {last}");
        last = d;
        let next = cpcp_step(&inst, TAU, ETA, beta, &cur).unwrap();
        prev = std::mem::replace(&mut cur, next);
    }
}
