mod common;

use cnpint_core::aao::{assemble, AaoSystem};
use cnpint_core::analysis::mr_norm_bound_check;
use cnpint_core::krylov::{gmres, gmres_left, gmres_right, rate_bound_check, GmresConfig, GmresStatus, Identity};
use cnpint_core::linalg::{dense_solve, BlockVector};
use cnpint_core::precond::{alpha_policy, AlphaPreconditioner};
use cnpint_core::spatial::{GridSpec, Preset, SetId};
use proptest::prelude::*;
use rand::Rng;

fn random_rhs(sys: AaoSystem, seed: u64) -> AaoSystem {
    let data = common::random_vec(&mut common::rng(seed), sys.dim());
    let rhs = BlockVector::from_vec(sys.m_steps(), sys.n_space(), data).unwrap();
    sys.with_rhs(rhs).unwrap()
}

fn preset_sys(id: SetId, n_t: usize) -> AaoSystem {
    let p = Preset::get(id);
    let grid = p.grid(n_t, GridSpec::UNIFORM).unwrap();
    let prob = p.problem_on(&grid).unwrap();
    assemble(&prob, p.t_final, n_t, None, &p.initial_value(&grid).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Preconditioned GMRES lands on the dense solution of `𝓜u = b`.
    #[test]
    fn matches_dense_solve(seed in any::<u64>(), m in 1usize..12, n in 1usize..16, la in -3.0f64..-0.5) {
        let mut r = common::rng(seed);
        let scale = 10f64.powf(r.random_range(-1.0..2.0));
        let a = common::random_nsd(&mut r, n, scale);
        let sys = random_rhs(AaoSystem::homogeneous(&a, 1.0, m, &vec![0.0; n]).unwrap(), seed);
        let pc = AlphaPreconditioner::build(10f64.powf(la), &sys).unwrap();
        let cfg = GmresConfig { tol: 1e-12, ..Default::default() };
        let (x, rep) = gmres_right(&sys, &pc, sys.rhs().as_slice(), &cfg).unwrap();
        prop_assert!(rep.converged);
        let want = dense_solve(&common::dense_aao(&sys), sys.rhs().as_slice()).unwrap();
        prop_assert!(common::rel_diff(&x, &want) <= 1e-9, "{:e}", common::rel_diff(&x, &want));
    }

    #[test]
    fn residuals_nonincreasing_within_cycles(seed in any::<u64>(), restart in 2usize..8) {
        let sys = random_rhs(preset_sys(SetId::II, 8), seed);
        let cfg = GmresConfig { restart, tol: 1e-10, max_total_iters: 400, record_history: true };
        let (_, rep) = gmres(&sys, sys.rhs().as_slice(), &cfg).unwrap();
        // each cycle shares its first entry with the previous cycle's last
        let h = &rep.residual_history;
        let mut start = 0;
        while start + 1 < h.len() {
            let end = (start + restart).min(h.len() - 1);
            for k in start..end {
                prop_assert!(h[k + 1] <= h[k] * (1.0 + 1e-10), "step {}: {} > {}", k, h[k + 1], h[k]);
            }
            start = end;
        }
    }
}

#[test]
fn preconditioner_choice_does_not_move_the_solution() {
    for id in [SetId::I, SetId::II] {
        let sys = preset_sys(id, 16);
        let cfg = GmresConfig { tol: 1e-9, ..Default::default() };
        let b = sys.rhs().as_slice();
        let p1 = AlphaPreconditioner::build(1.0, &sys).unwrap();
        let pa = AlphaPreconditioner::build(1e-3, &sys).unwrap();
        let (x1, r1) = gmres_right(&sys, &p1, b, &cfg).unwrap();
        let (xa, ra) = gmres_right(&sys, &pa, b, &cfg).unwrap();
        assert!(r1.converged && ra.converged, "{id}");
        assert!(ra.iterations < r1.iterations, "{id}");
        assert!(common::rel_diff(&x1, &xa) <= 1e-7, "{id}: {:e}", common::rel_diff(&x1, &xa));
        let seq = sys.solve_sequential().unwrap();
        assert!(common::rel_diff(&xa, seq.as_slice()) <= 1e-7, "{id}");
    }
}

#[test]
fn tiny_alpha_is_almost_exact() {
    let sys = random_rhs(AaoSystem::homogeneous(&common::heat(31), 1.0, 32, &[0.0; 31]).unwrap(), 3);
    let pc = AlphaPreconditioner::build(1e-6, &sys).unwrap();
    let (_, rep) = gmres_right(&sys, &pc, sys.rhs().as_slice(), &GmresConfig::default()).unwrap();
    assert!(rep.iterations <= 2, "{}", rep.iterations);
    // round-off grows like 1/α and the apply refuses to drop a large imaginary part
    let pc = AlphaPreconditioner::build(1e-12, &sys).unwrap();
    let err = gmres_right(&sys, &pc, sys.rhs().as_slice(), &GmresConfig::default()).unwrap_err();
    assert!(matches!(err, cnpint_core::Error::ImaginaryResidue { .. }), "{err:?}");
}

#[test]
fn left_rate_bound_on_heat() {
    let (m, n) = (32, 32);
    let sys = random_rhs(AaoSystem::homogeneous(&common::heat(n), 1.0, m, &vec![0.0; n]).unwrap(), 8);
    let alpha = alpha_policy(0.25, sys.tau(), sys.t_final());
    assert!((alpha - 0.25 * (sys.tau() / sys.t_final()).sqrt()).abs() < 1e-15);
    let pc = AlphaPreconditioner::build(alpha, &sys).unwrap();
    let cfg = GmresConfig::full(1e-13, 200);
    let (_, rep) = gmres_left(&sys, &pc, sys.rhs().as_slice(), &cfg).unwrap();
    assert!(rep.converged);
    let h = &rep.residual_history;
    for (k, rk) in h.iter().enumerate().skip(1) {
        assert!(rk / h[0] <= 0.75f64.powi(k as i32), "k = {k}: {}", rk / h[0]);
    }
    let chk = rate_bound_check(&rep, alpha, sys.tau(), sys.t_final()).unwrap();
    assert!(chk.holds && !chk.advisory);
    assert!((chk.bound_rate - 0.75).abs() < 1e-14);
    let mr = mr_norm_bound_check(&sys).unwrap();
    assert!(mr.holds, "{mr:?}");
}

#[test]
fn identity_preconditioner_is_plain_gmres() {
    let sys = random_rhs(preset_sys(SetId::III, 8), 4);
    let cfg = GmresConfig { restart: 10, max_total_iters: 30, ..Default::default() };
    let (x0, r0) = gmres(&sys, sys.rhs().as_slice(), &cfg).unwrap();
    let (x1, r1) = gmres_right(&sys, &Identity(sys.dim()), sys.rhs().as_slice(), &cfg).unwrap();
    assert_eq!(r0.residual_history, r1.residual_history);
    assert_eq!(x0, x1);
    assert_eq!(r0.status, GmresStatus::MaxIterations);
}

#[test]
fn zero_rhs_returns_immediately() {
    let sys = AaoSystem::homogeneous(&common::heat(5), 1.0, 4, &[0.0; 5]).unwrap();
    let pc = AlphaPreconditioner::build(0.1, &sys).unwrap();
    let (x, rep) = gmres_right(&sys, &pc, &[0.0; 20], &GmresConfig::default()).unwrap();
    assert_eq!(rep.iterations, 0);
    assert!(x.iter().all(|&v| v == 0.0));
    assert!(gmres(&sys, &[1.0; 3], &GmresConfig::default()).is_err());
}
