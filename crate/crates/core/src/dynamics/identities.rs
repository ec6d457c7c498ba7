//! Determinant identities along a trajectory.
//!
//! The lattice operator `δ∂ₜ + ∂f/∂q`, normalised by `∂ₜ` and written with
//! the retarded Green's function `θ(t − t′)`, is block lower-triangular
//! with diagonal blocks `I + ½Δt J(q_k)` (`θ(0) = ½`). Its determinant is
//! therefore the product of those block determinants and should approach
//! `exp(½∫∇·f dt)` linearly in `Δt`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{integrate, DynamicsError, Flow, Trajectory};

#[derive(Clone, Debug, Serialize)]
pub struct DetMCheck {
    pub dt: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// `Π_{k=1}^{n} det(I + ½Δt J(q_k))` against `exp(½∫∇·f dt)`.
pub fn detm_identity_check(flow: &Flow, traj: &Trajectory) -> Result<DetMCheck, DynamicsError> {
    if traj.steps() == 0 {
        return Err(DynamicsError::EmptyTrajectory);
    }
    let n = flow.dim();
    let mut log_abs = 0.0;
    let mut negative = false;
    for k in 1..traj.t.len() {
        let h = traj.t[k] - traj.t[k - 1];
        let block = DMatrix::identity(n, n) + flow.jacobian(&traj.q[k]) * (0.5 * h);
        let d = block.determinant();
        log_abs += d.abs().ln();
        negative ^= d < 0.0;
    }
    let lhs = if negative { -log_abs.exp() } else { log_abs.exp() };
    let rhs = (0.5 * traj.divint.last().copied().unwrap_or(0.0)).exp();
    Ok(DetMCheck { dt: traj.dt, lhs, rhs, rel_error: (lhs - rhs).abs() / rhs.abs() })
}

#[derive(Clone, Debug, Serialize)]
pub struct WronskianCheck {
    /// `det K(t₂) / det K(t₁)`.
    pub ratio: f64,
    /// `exp(−∫∇·f dt)`.
    pub expected: f64,
    pub rel_error: f64,
}

/// Abel–Liouville for the auxiliary flow: `det K(t₂)/det K(t₁) = exp(−∫∇·f)`.
pub fn wronskian_check(traj: &Trajectory) -> Result<WronskianCheck, DynamicsError> {
    let first = *traj.det_k.first().ok_or(DynamicsError::EmptyTrajectory)?;
    if first == 0.0 {
        return Err(DynamicsError::SingularInitialJacobi);
    }
    let ratio = traj.det_k.last().copied().unwrap_or(first) / first;
    let expected = (-traj.divint.last().copied().unwrap_or(0.0)).exp();
    Ok(WronskianCheck { ratio, expected, rel_error: (ratio - expected).abs() / expected.abs() })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64, DynamicsError> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 || pts.len() != xs.len() {
        return Err(DynamicsError::DegenerateFit);
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(DynamicsError::DegenerateFit);
    }
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// det M checks over several step sizes and the observed order.
#[derive(Clone, Debug, Serialize)]
pub struct DetMConvergence {
    pub checks: Vec<DetMCheck>,
    /// Log-log slope of the relative error against `Δt`.
    pub slope: f64,
}

pub fn detm_convergence(
    flow: &Flow,
    q0: &[f64],
    qbar0: &[f64],
    t_end: f64,
    dts: &[f64],
) -> Result<DetMConvergence, DynamicsError> {
    let checks = dts
        .iter()
        .map(|&dt| detm_identity_check(flow, &integrate(flow, q0, qbar0, 0.0, t_end, dt)?))
        .collect::<Result<Vec<_>, _>>()?;
    let errors: Vec<f64> = checks.iter().map(|c| c.rel_error).collect();
    let slope = loglog_slope(dts, &errors)?;
    Ok(DetMConvergence { checks, slope })
}

#[cfg(test)]
mod tests {
    use super::super::tests::flow;
    use super::*;

    #[test]
    fn divergence_free_flow_has_unit_rhs() {
        let fl = flow(&["x", "y"], &["-y", "x"]);
        let traj = integrate(&fl, &[1.0, 0.0], &[0.0, 0.0], 0.0, 5.0, 1e-2).unwrap();
        let c = detm_identity_check(&fl, &traj).unwrap();
        assert_eq!(c.rhs, 1.0);
        // Oracle: each block has det 1 + Δt²/4.
        let expected = (1.0 + 1e-4 / 4.0f64).powi(500);
        assert!((c.lhs - expected).abs() < 1e-12);
        let w = wronskian_check(&traj).unwrap();
        assert!(w.rel_error < 1e-10);
    }

    #[test]
    fn linear_decay_closed_forms() {
        let (gamma, t) = (0.3, 4.0);
        let fl = flow(&["q"], &["-gamma*q"]);
        let traj = integrate(&fl, &[1.0], &[1.0], 0.0, t, 1e-3).unwrap();
        let c = detm_identity_check(&fl, &traj).unwrap();
        assert!((c.rhs - (-gamma * t / 2.0f64).exp()).abs() < 1e-12);
        let expected_lhs = (1.0 - 0.5 * gamma * 1e-3f64).powi(4000);
        assert!((c.lhs - expected_lhs).abs() < 1e-12);
        let w = wronskian_check(&traj).unwrap();
        assert!((w.ratio - (gamma * t).exp()).abs() < 1e-10);
    }

    #[test]
    fn zero_horizon() {
        let fl = flow(&["q"], &["-gamma*q"]);
        let traj = integrate(&fl, &[1.0], &[1.0], 0.0, 0.0, 1e-3).unwrap();
        assert_eq!(wronskian_check(&traj).unwrap().ratio, 1.0);
        assert!(matches!(detm_identity_check(&fl, &traj), Err(DynamicsError::EmptyTrajectory)));
    }

    #[test]
    fn first_order_convergence() {
        let fl = flow(&["q"], &["-gamma*q"]);
        let conv = detm_convergence(&fl, &[1.0], &[1.0], 4.0, &[4e-3, 2e-3, 1e-3]).unwrap();
        assert!((conv.slope - 1.0).abs() < 0.05, "slope {}", conv.slope);
        assert!(conv.checks.windows(2).all(|w| w[1].rel_error < w[0].rel_error));
    }

    #[test]
    fn slope_fit() {
        let xs = [0.1, 0.01, 0.001];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
