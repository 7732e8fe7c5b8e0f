//! Invariant suite on small seeded fixtures, run by `ippa verify`.
//!
//! Every check returns a [`Check`] instead of panicking so a caller can report all of
//! them. Fixture sizes and tolerances are arguments; [`VerifySettings::default`] holds the
//! standard ones.

use std::time::Instant;

use ippa_core::cpcp::{generate_instance, iladmm_cpcp, ladmm_cpcp, BetaController, CpcpSpec};
use ippa_core::numkit::{svd, vecops, DenseMatrix, MeasurementOp, SeededRng, TransformKind};
use ippa_core::prox::{svt, Quadratic};
use ippa_core::splitting::{
    contraction_report, ergodic_report, iladmm_step, ladmm_step, nonergodic_report, run_ladmm,
    to_mixed_vi, vi_residual_check, PrimalDualPoint, QpFixture,
};
use ippa_core::vi_core::{
    check_inertial_rate_bound, nesterov_ippa, run_inertial_ppa, sample_probes, AffineVi, AlphaRule,
    DenseWeight, InertialSchedule, LambdaRule, StopRule,
};
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Result<Check> {
        let start = Instant::now();
        let (passed, detail) = f()?;
        Ok(Check {
            name: name.to_string(),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub fixtures: usize,
    pub iterations: usize,
    pub probes: usize,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            fixtures: 20,
            iterations: 500,
            probes: 100,
            seed: 2024,
        }
    }
}

impl VerifySettings {
    fn qp(&self, i: usize) -> Result<QpFixture> {
        let mut rng = SeededRng::new(self.seed).split(&format!("qp-{i}"));
        Ok(QpFixture::random(8, 8, 8, &mut rng)?)
    }

    fn rng(&self, label: &str) -> SeededRng {
        SeededRng::new(self.seed).split(label)
    }
}

fn zeros() -> PrimalDualPoint {
    PrimalDualPoint::zeros(8, 8, 8)
}

/// Every linearized ADMM step satisfies its proximal VI inequality at random probes.
pub fn check_vi_residual(s: &VerifySettings, steps: usize) -> Result<Check> {
    Check::timed("ladmm step VI residual", || {
        let mut rng = s.rng("vi-residual");
        let mut worst = f64::INFINITY;
        for i in 0..s.fixtures {
            let fx = s.qp(i)?;
            let vi = to_mixed_vi(&fx.problem)?;
            let params = fx.params(0.0)?;
            let mut w = zeros();
            for _ in 0..steps {
                let next = ladmm_step(&fx.problem, &params, &w)?;
                let probes = sample_probes(&vi, &next.to_vec(), s.probes, 10.0, &mut rng)?;
                worst = worst.min(vi_residual_check(&fx.problem, &params, &w, &next, &probes));
                w = next;
            }
        }
        Ok((
            worst >= -1e-8,
            format!(
                "min slack {worst:.3e} over {} fixtures x {steps} steps",
                s.fixtures
            ),
        ))
    })
}

/// `φₖ₊₁ ≤ φₖ − ‖wᵏ⁺¹ − wᵏ‖²_G` with `φₖ = ‖wᵏ − w*‖²_G`.
pub fn check_contraction(s: &VerifySettings) -> Result<Check> {
    Check::timed("contraction towards the KKT point", || {
        let mut worst = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 0..s.fixtures {
            let fx = s.qp(i)?;
            let params = fx.params(0.0)?;
            let g = params.weight(&fx.problem);
            let tr = run_ladmm(
                &fx.problem,
                &params,
                &zeros(),
                StopRule::fixed(s.iterations),
                None,
            )?;
            let rep = contraction_report(&tr, &g, &fx.kkt.to_vec());
            ok &= rep.first_violation.is_none();
            worst = worst.max(rep.max_excess);
        }
        Ok((ok, format!("max excess {worst:.3e}")))
    })
}

/// `‖wᵏ − wᵏ⁻¹‖_G` nonincreasing, `k‖wᵏ − wᵏ⁻¹‖²_G ≤ ‖w⁰ − w*‖²_G`, and the scaled
/// residual at the last iteration below its value at a tenth of the run.
pub fn check_nonergodic(s: &VerifySettings) -> Result<Check> {
    Check::timed("nonergodic rate", || {
        let k = s.iterations;
        let mut failures = Vec::new();
        for i in 0..s.fixtures {
            let fx = s.qp(i)?;
            let params = fx.params(0.0)?;
            let g = params.weight(&fx.problem);
            let tr = run_ladmm(&fx.problem, &params, &zeros(), StopRule::fixed(k), None)?;
            let rep = nonergodic_report(&tr, &g, &fx.kkt.to_vec());
            let decays = rep.k_diffs[k - 1] < rep.k_diffs[k / 10 - 1];
            if !rep.holds() || !decays {
                failures.push(format!(
                    "fixture {i}: monotone {:?}, rate {:?}, decays {decays}",
                    rep.monotonicity_violation, rep.rate_violation
                ));
            }
        }
        Ok((
            failures.is_empty(),
            if failures.is_empty() {
                format!("{} fixtures, {k} iterations", s.fixtures)
            } else {
                failures.join("; ")
            },
        ))
    })
}

/// Lagrangian gap of the running average within `‖w − w⁰‖²_G/(2(k+1))` at each `k`.
pub fn check_ergodic(s: &VerifySettings, ks: &[usize], probes: usize) -> Result<Check> {
    Check::timed("ergodic gap bound", || {
        let mut rng = s.rng("ergodic");
        let last = ks.iter().copied().max().unwrap_or(0);
        let mut worst = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 0..s.fixtures {
            let fx = s.qp(i)?;
            let vi = to_mixed_vi(&fx.problem)?;
            let params = fx.params(0.0)?;
            let g = params.weight(&fx.problem);
            let tr = run_ladmm(
                &fx.problem,
                &params,
                &zeros(),
                StopRule::fixed(last + 1),
                None,
            )?;
            for &k in ks {
                let pts = sample_probes(&vi, &tr.iterates[k + 1], probes, 10.0, &mut rng)?;
                let rep = ergodic_report(&tr, &fx.problem, &g, k, &pts)?;
                ok &= rep.holds();
                worst = worst.max(rep.max_excess());
            }
        }
        Ok((ok, format!("max excess {worst:.3e} at k in {ks:?}")))
    })
}

/// `F(w) = Mw + r` with `sym(M) ⪰ μI`, unconstrained.
pub fn strongly_monotone_vi(rng: &mut SeededRng, n: usize, mu: f64) -> Result<AffineVi> {
    let a = rng.normal_matrix(n, n);
    let s = rng.normal_matrix(n, n);
    let mut m = &a.t_matmul(&a)?.scale(0.2) + &(&s - &s.transpose());
    for i in 0..n {
        m[(i, i)] += mu;
    }
    Ok(AffineVi::unconstrained(
        DenseMatrix::zeros(n, n),
        vec![0.0; n],
        m,
        rng.normal_vec(n),
    )?)
}

fn spd_weight(rng: &mut SeededRng, n: usize) -> Result<DenseWeight> {
    let g = rng.normal_matrix(n, n);
    let mut w = g.t_matmul(&g)?.scale(1.0 / n as f64);
    for i in 0..n {
        w[(i, i)] += 0.5;
    }
    Ok(DenseWeight::new(w)?)
}

/// `min_{i<k} ‖wⁱ⁺¹ − w̄ⁱ‖²_G ≤ c(α)·‖w⁰ − w*‖²_G / k` with constant inertial weight `α`.
pub fn check_inertial_rate(s: &VerifySettings, alpha: f64) -> Result<Check> {
    Check::timed("inertial min-residual rate", || {
        let mut rng = s.rng("inertial-rate");
        let mut failures = Vec::new();
        let mut constant = f64::NAN;
        for i in 0..s.fixtures {
            let n = 2 + i % 4;
            let p = strongly_monotone_vi(&mut rng, n, 0.5)?;
            let w_star = p.solve_direct()?;
            let g = spd_weight(&mut rng, n)?;
            let sched = InertialSchedule::constant(alpha, 1.0)?;
            let w0 = vecops::scale(3.0, &rng.normal_vec(n));
            let tr = run_inertial_ppa(
                &p,
                &g,
                &sched,
                &w0,
                StopRule::fixed(s.iterations),
                Some(&w_star),
            )?;
            let rep = check_inertial_rate_bound(&tr, &g, &w_star)?;
            constant = rep.constant;
            if !rep.holds() {
                failures.push(format!("fixture {i} at k = {:?}", rep.first_violation));
            }
        }
        Ok((
            failures.is_empty(),
            if failures.is_empty() {
                format!(
                    "constant {constant:.2}, {} fixtures, k <= {}",
                    s.fixtures, s.iterations
                )
            } else {
                failures.join("; ")
            },
        ))
    })
}

/// `k²(f(wᵏ) − f*) ≤ 4‖w⁰ − c‖²` for `f = ½‖w − c‖²` in ℝ¹⁰ with unit proximal steps.
pub fn check_nesterov(s: &VerifySettings) -> Result<Check> {
    Check::timed("nesterov objective rate", || {
        let mut rng = s.rng("nesterov");
        let mut worst = 0.0_f64;
        for _ in 0..s.fixtures {
            let c = rng.normal_vec(10);
            let w0 = vecops::scale(3.0, &rng.normal_vec(10));
            let f = Quadratic::squared_distance(&c);
            let tr = nesterov_ippa(&f, &LambdaRule::Constant(1.0), &w0, s.iterations)?;
            let obj = tr.objective.expect("nesterov trace records f");
            let bound = 4.0 * vecops::norm_sq(&vecops::sub(&w0, &c));
            for (k, v) in obj.iter().enumerate().skip(1) {
                worst = worst.max((k * k) as f64 * v / bound);
            }
        }
        Ok((worst <= 1.0, format!("max k^2 gap / bound = {worst:.3}")))
    })
}

/// Zero inertia reproduces the plain iteration; measurement operators are co-isometries;
/// `svt` shrinks the spectrum.
pub fn check_identities(s: &VerifySettings) -> Result<Check> {
    Check::timed("identities", || {
        let mut notes = Vec::new();
        let mut ok = true;

        let mut traj = 0.0_f64;
        for i in 0..s.fixtures.min(5) {
            let fx = s.qp(i)?;
            let params = fx.params(0.0)?;
            let (mut plain, mut inertial, mut prev) = (zeros(), zeros(), zeros());
            for _ in 0..100 {
                plain = ladmm_step(&fx.problem, &params, &plain)?;
                let (_, next) = iladmm_step(&fx.problem, &params, &inertial, &prev, 0.0)?;
                prev = std::mem::replace(&mut inertial, next);
                traj = traj.max(vecops::max_abs_diff(&plain.to_vec(), &inertial.to_vec()));
            }
        }
        let spec = CpcpSpec::from_ratios(32, 32, 2, 0.03, 0.8, TransformKind::Dct2, s.seed)?;
        let inst = generate_instance(spec)?;
        let stop = StopRule {
            tol: 0.0,
            max_iter: 30,
        };
        let ctrl = BetaController::for_instance(&inst);
        let (a, _) = ladmm_cpcp(&inst, 0.99, 0.99, ctrl, stop)?;
        let (b, _) = iladmm_cpcp(&inst, 0.99, 0.99, AlphaRule::Constant(0.0), ctrl, stop)?;
        traj = traj
            .max(a.l.max_abs_diff(&b.l))
            .max(a.s.max_abs_diff(&b.s))
            .max(vecops::max_abs_diff(&a.p, &b.p));
        ok &= traj <= 1e-14;
        notes.push(format!("zero-inertia trajectory gap {traj:.1e}"));

        let mut rng = s.rng("identities");
        let mut coiso = 0.0_f64;
        for (kind, rows, cols) in [(TransformKind::Wht, 16, 32), (TransformKind::Dct2, 24, 20)] {
            let op = MeasurementOp::random(kind, rows, cols, rows * cols / 2, &mut rng)?;
            for _ in 0..20 {
                let b = rng.normal_vec(op.measurement_len());
                coiso = coiso.max(vecops::max_abs_diff(&op.apply(&op.adjoint(&b)?)?, &b));
            }
        }
        ok &= coiso <= 1e-12;
        notes.push(format!("AA* - I {coiso:.1e}"));

        let mut spec_gap = 0.0_f64;
        for i in 0..20 {
            let m = rng.normal_matrix(6 + i % 5, 4 + i % 7);
            let kappa = 0.2 + 0.1 * i as f64;
            let expected: Vec<f64> = svd(&m)?.s.iter().map(|v| (v - kappa).max(0.0)).collect();
            let got = svd(&svt(&m, kappa)?)?.s;
            spec_gap = spec_gap.max(vecops::max_abs_diff(&expected, &got));
        }
        ok &= spec_gap <= 1e-10;
        notes.push(format!("svt spectrum {spec_gap:.1e}"));
        Ok((ok, notes.join(", ")))
    })
}

/// The full suite at the given settings.
pub fn run_verify(s: &VerifySettings) -> Result<Vec<Check>> {
    Ok(vec![
        check_vi_residual(s, 50)?,
        check_contraction(s)?,
        check_nonergodic(s)?,
        check_ergodic(s, &[50, 100, 200], 50)?,
        check_inertial_rate(s, 0.28)?,
        check_nesterov(s)?,
        check_identities(s)?,
    ])
}
