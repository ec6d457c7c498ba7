//! Trajectories and determinant identities on the built-in systems.

use std::collections::BTreeMap;

use emergentq::catalog::{builtin, BUILTIN_NAMES};
use emergentq::dynamics::{
    conservation_report, detm_identity_check, integrate, wronskian_check, Flow, Trajectory,
};
use emergentq::phasespace::SymExpr;
use emergentq::suite::numeric_params;

fn run(name: &str, dt: f64, t: f64) -> (Flow, Trajectory, Vec<(String, SymExpr)>, BTreeMap<String, f64>) {
    let c = builtin(name).unwrap().compile().unwrap();
    let params = numeric_params(&c);
    let flow = Flow::from_system(&c.sys, &params).unwrap();
    let n = flow.dim();
    let q0: Vec<f64> = (0..n).map(|i| 0.3 + 0.2 * i as f64).collect();
    let traj = integrate(&flow, &q0, &vec![0.5; n], 0.0, t, dt).unwrap();
    let charges = c.charges.charges.iter().enumerate().map(|(i, e)| (format!("C{}", i + 1), e.clone())).collect();
    (flow, traj, charges, params)
}

#[test]
fn roessler_first_integrals_hold_along_the_flow() {
    let (_, traj, charges, params) = run("roessler-duffing", 1e-3, 8.0);
    assert!(traj.diagnostic.is_none());
    let drifts = conservation_report(&traj, &charges, &params).unwrap();
    assert_eq!(drifts.len(), 2);
    for d in drifts {
        assert!(d.max_drift < 1e-8, "{d:?}");
    }
}

#[test]
fn identity_errors_shrink_under_refinement() {
    for name in BUILTIN_NAMES {
        let errors: Vec<f64> = [1e-2, 3e-3, 1e-3]
            .iter()
            .map(|&dt| {
                let (flow, traj, _, _) = run(name, dt, 3.0);
                detm_identity_check(&flow, &traj).unwrap().rel_error
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{name}: {errors:?}");
        let (_, traj, _, _) = run(name, 1e-2, 3.0);
        assert!(wronskian_check(&traj).unwrap().rel_error < 1e-8, "{name}");
    }
}

#[test]
fn jacobi_determinant_stays_away_from_zero() {
    for name in BUILTIN_NAMES {
        let (_, traj, _, _) = run(name, 1e-2, 5.0);
        assert!(traj.det_k.iter().all(|d| d.abs() > 1e-6), "{name}");
    }
}

#[test]
fn oscillator_charge_uses_the_bound_parameter() {
    // C = x² + y² + d²(q̄ₓ² + q̄ᵧ²) needs d; it comes from the rescaling d = −m·ħ/2.
    let (_, traj, charges, params) = run("pendulum-oscillator", 1e-3, 5.0);
    assert_eq!(params["d"], -0.5);
    let drift = conservation_report(&traj, &charges, &params).unwrap();
    assert!(drift[0].max_drift < 1e-10, "{drift:?}");
}
