//! Numerical trajectories of the doubled system and the identities they
//! must satisfy.
//!
//! [`integrate`] advances, with classical fourth-order Runge–Kutta,
//!
//! ```text
//! q̇  = f(q)
//! q̄̇  = −(∂f/∂q)ᵀ q̄
//! K̇  = −(∂f/∂q)ᵀ K,          K(t₁) = I
//! ḋ  = ∇·f                  (running divergence integral)
//! ```
//!
//! as one state vector. Symbolic expressions are compiled once into
//! [`NumericExpr`] so the inner loop never touches symbol tables.

mod identities;
mod langevin;

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

pub use identities::{
    detm_convergence, detm_identity_check, loglog_slope, wronskian_check, DetMCheck, DetMConvergence, WronskianCheck,
};
pub use langevin::{gradient_of, langevin_ensemble, langevin_scaling, LangevinScaling, LangevinStats};

use crate::dirac::ExtendedSystem;
use crate::phasespace::{aux, PhaseSpaceError, SymExpr};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("time step must be positive and finite (got {0})")]
    BadStep(f64),
    #[error("time window [{0}, {1}] is empty or reversed")]
    BadWindow(f64, f64),
    #[error("expected {expected} initial values, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("no numeric value for symbol `{0}`")]
    Unbound(String),
    #[error("coefficient {0} cannot be represented as a float")]
    NonFinite(String),
    #[error("det K(t₁) vanishes")]
    SingularInitialJacobi,
    #[error("trajectory has no steps")]
    EmptyTrajectory,
    #[error("ħ must be non-negative (got {0})")]
    NegativeHbar(f64),
    #[error("Langevin ensemble became non-finite (step {0} too large?)")]
    UnstableStep(f64),
    #[error("need at least two positive points for a log-log fit")]
    DegenerateFit,
    #[error("CSV export failed: {0}")]
    Csv(String),
    #[error(transparent)]
    Expr(#[from] PhaseSpaceError),
}

#[derive(Clone, Debug)]
struct NumTerm {
    coeff: f64,
    powers: Vec<(usize, i32)>,
    exp: Vec<(usize, f64)>,
}

/// A [`SymExpr`] compiled against a fixed variable ordering, with
/// parameters folded in.
#[derive(Clone, Debug)]
pub struct NumericExpr {
    terms: Vec<NumTerm>,
}

impl NumericExpr {
    pub fn compile<S: AsRef<str>>(
        expr: &SymExpr,
        vars: &[S],
        params: &BTreeMap<String, f64>,
    ) -> Result<Self, DynamicsError> {
        let index = |s: &str| vars.iter().position(|v| v.as_ref() == s);
        let mut terms = Vec::new();
        for (key, c) in expr.terms() {
            let mut coeff = c.to_f64();
            let mut powers = Vec::new();
            let mut exp = Vec::new();
            for (s, &e) in &key.mono {
                match index(s) {
                    Some(i) => powers.push((i, e)),
                    None => coeff *= params.get(s).ok_or_else(|| DynamicsError::Unbound(s.clone()))?.powi(e),
                }
            }
            let mut constant_exponent = 0.0;
            for (s, w) in &key.exp {
                let w = w.to_f64().ok_or_else(|| DynamicsError::NonFinite(w.to_string()))?;
                match index(s) {
                    Some(i) => exp.push((i, w)),
                    None => constant_exponent += w * params.get(s).ok_or_else(|| DynamicsError::Unbound(s.clone()))?,
                }
            }
            coeff *= constant_exponent.exp();
            if !coeff.is_finite() {
                return Err(DynamicsError::NonFinite(c.to_string()));
            }
            terms.push(NumTerm { coeff, powers, exp });
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mono: f64 = t.powers.iter().map(|&(i, e)| x[i].powi(e)).product();
                let lin: f64 = t.exp.iter().map(|&(i, w)| w * x[i]).sum();
                if t.exp.is_empty() {
                    t.coeff * mono
                } else {
                    t.coeff * mono * lin.exp()
                }
            })
            .sum()
    }
}

/// The velocity field `f` and its Jacobian, compiled for numerics.
#[derive(Clone, Debug)]
pub struct Flow {
    pub coords: Vec<String>,
    f: Vec<NumericExpr>,
    jac: Vec<Vec<NumericExpr>>,
}

impl Flow {
    pub fn new<S: AsRef<str>>(coords: &[S], f: &[SymExpr], params: &BTreeMap<String, f64>) -> Result<Self, DynamicsError> {
        if coords.len() != f.len() {
            return Err(DynamicsError::Dimension { expected: coords.len(), found: f.len() });
        }
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        let compiled = f.iter().map(|fa| NumericExpr::compile(fa, &coords, params)).collect::<Result<Vec<_>, _>>()?;
        let jac = f
            .iter()
            .map(|fa| coords.iter().map(|c| NumericExpr::compile(&fa.differentiate(c), &coords, params)).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        Ok(Self { coords, f: compiled, jac })
    }

    pub fn from_system(sys: &ExtendedSystem, params: &BTreeMap<String, f64>) -> Result<Self, DynamicsError> {
        Self::new(sys.coords(), &sys.f, params)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn velocity(&self, q: &[f64]) -> Vec<f64> {
        self.f.iter().map(|fa| fa.eval(q)).collect()
    }

    /// `J[a][b] = ∂f_a/∂q_b`.
    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, b| self.jac[a][b].eval(q))
    }

    pub fn divergence(&self, q: &[f64]) -> f64 {
        (0..self.dim()).map(|a| self.jac[a][a].eval(q)).sum()
    }

    /// Right-hand side for the packed state `[q, q̄, vec(K), d]`.
    fn rhs(&self, state: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let q = &state[..n];
        let qbar = &state[n..2 * n];
        let k = &state[2 * n..2 * n + n * n];
        let j = self.jacobian(q);
        let mut out = Vec::with_capacity(state.len());
        out.extend(self.velocity(q));
        for a in 0..n {
            out.push(-(0..n).map(|b| qbar[b] * j[(b, a)]).sum::<f64>());
        }
        // K stored column-major: K[a][c] at c*n + a.
        for c in 0..n {
            for a in 0..n {
                out.push(-(0..n).map(|b| j[(b, a)] * k[c * n + b]).sum::<f64>());
            }
        }
        out.push(j.trace());
        out
    }
}

/// A sampled solution of the doubled equations.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub coords: Vec<String>,
    pub dt: f64,
    pub t: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub qbar: Vec<Vec<f64>>,
    /// Fundamental matrix of the auxiliary flow, row-major per slice.
    pub jacobi: Vec<Vec<f64>>,
    pub det_k: Vec<f64>,
    /// `∫_{t₁}^{t} ∇·f dt`.
    pub divint: Vec<f64>,
    /// Why integration stopped early, if it did.
    pub diagnostic: Option<String>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.t.len().saturating_sub(1)
    }

    pub fn jacobi_matrix(&self, slice: usize) -> DMatrix<f64> {
        let n = self.coords.len();
        DMatrix::from_row_slice(n, n, &self.jacobi[slice])
    }

    /// CSV with header `t,q_1..q_N,qb_1..qb_N,detK,divint`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DynamicsError> {
        let n = self.coords.len();
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=n).map(|i| format!("q_{i}")))
            .chain((1..=n).map(|i| format!("qb_{i}")))
            .chain(["detK".to_string(), "divint".to_string()])
            .collect();
        let err = |e: csv::Error| DynamicsError::Csv(e.to_string());
        w.write_record(&header).map_err(err)?;
        for i in 0..self.t.len() {
            let row: Vec<String> = std::iter::once(self.t[i])
                .chain(self.q[i].iter().copied())
                .chain(self.qbar[i].iter().copied())
                .chain([self.det_k[i], self.divint[i]])
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| DynamicsError::Csv(e.to_string()))
    }
}

/// Integrate from `t1` to `t2` with step `dt` (the last step is shortened
/// to land on `t2`). A non-finite state truncates the trajectory and sets
/// [`Trajectory::diagnostic`].
pub fn integrate(flow: &Flow, q0: &[f64], qbar0: &[f64], t1: f64, t2: f64, dt: f64) -> Result<Trajectory, DynamicsError> {
    let n = flow.dim();
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::BadStep(dt));
    }
    if !(t2 >= t1) {
        return Err(DynamicsError::BadWindow(t1, t2));
    }
    for v in [q0, qbar0] {
        if v.len() != n {
            return Err(DynamicsError::Dimension { expected: n, found: v.len() });
        }
    }
    let mut state: Vec<f64> = q0.iter().chain(qbar0).copied().collect();
    for c in 0..n {
        for a in 0..n {
            state.push(if a == c { 1.0 } else { 0.0 });
        }
    }
    state.push(0.0);

    let steps = ((t2 - t1) / dt - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory {
        coords: flow.coords.clone(),
        dt,
        t: Vec::with_capacity(steps + 1),
        q: Vec::with_capacity(steps + 1),
        qbar: Vec::with_capacity(steps + 1),
        jacobi: Vec::with_capacity(steps + 1),
        det_k: Vec::with_capacity(steps + 1),
        divint: Vec::with_capacity(steps + 1),
        diagnostic: None,
    };
    let record = |traj: &mut Trajectory, t: f64, s: &[f64]| {
        let k = DMatrix::from_column_slice(n, n, &s[2 * n..2 * n + n * n]);
        traj.t.push(t);
        traj.q.push(s[..n].to_vec());
        traj.qbar.push(s[n..2 * n].to_vec());
        traj.det_k.push(k.determinant());
        traj.jacobi.push(k.transpose().as_slice().to_vec());
        traj.divint.push(s[2 * n + n * n]);
    };
    record(&mut traj, t1, &state);
    let axpy = |s: &[f64], k: &[f64], h: f64| -> Vec<f64> { s.iter().zip(k).map(|(x, y)| x + h * y).collect() };
    for step in 1..=steps {
        let t_prev = t1 + (step - 1) as f64 * dt;
        let t = if step == steps { t2 } else { t1 + step as f64 * dt };
        let h = t - t_prev;
        let k1 = flow.rhs(&state);
        let k2 = flow.rhs(&axpy(&state, &k1, h / 2.0));
        let k3 = flow.rhs(&axpy(&state, &k2, h / 2.0));
        let k4 = flow.rhs(&axpy(&state, &k3, h));
        for i in 0..state.len() {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if state.iter().any(|v| !v.is_finite()) {
            traj.diagnostic = Some(format!("state became non-finite at t = {t}"));
            break;
        }
        record(&mut traj, t, &state);
    }
    Ok(traj)
}

/// Drift of one conserved quantity along a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct ChargeDrift {
    pub label: String,
    pub initial: f64,
    /// `max_t |C(t) − C(t₁)| / max(1, |C(t₁)|)`.
    pub max_drift: f64,
}

/// Evaluate each charge (an expression in `q` and `q̄`) along the trajectory.
pub fn conservation_report(
    traj: &Trajectory,
    charges: &[(String, SymExpr)],
    params: &BTreeMap<String, f64>,
) -> Result<Vec<ChargeDrift>, DynamicsError> {
    let vars: Vec<String> = traj.coords.iter().cloned().chain(traj.coords.iter().map(|c| aux(c))).collect();
    charges
        .iter()
        .map(|(label, c)| {
            let num = NumericExpr::compile(c, &vars, params)?;
            let at = |i: usize| {
                let x: Vec<f64> = traj.q[i].iter().chain(&traj.qbar[i]).copied().collect();
                num.eval(&x)
            };
            let initial = at(0);
            let scale = initial.abs().max(1.0);
            let max_drift = (0..traj.t.len()).map(|i| (at(i) - initial).abs() / scale).fold(0.0, f64::max);
            Ok(ChargeDrift { label: label.clone(), initial, max_drift })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::PhaseSpace;

    pub(crate) fn flow(coords: &[&str], f: &[&str]) -> Flow {
        let space = PhaseSpace::doubled(coords, &["gamma"]).unwrap();
        let f: Vec<SymExpr> = f.iter().map(|e| space.parse(e).unwrap()).collect();
        Flow::new(coords, &f, &BTreeMap::from([("gamma".to_string(), 0.3)])).unwrap()
    }

    #[test]
    fn pendulum_follows_the_rotation() {
        let fl = flow(&["x", "y"], &["-y", "x"]);
        let traj = integrate(&fl, &[1.0, 0.0], &[0.0, 0.0], 0.0, 10.0, 1e-3).unwrap();
        assert_eq!(traj.steps(), 10_000);
        for (t, q) in traj.t.iter().zip(&traj.q).step_by(500) {
            assert!((q[0] - t.cos()).abs() < 1e-10 && (q[1] - t.sin()).abs() < 1e-10);
        }
        let space = PhaseSpace::doubled(&["x", "y"], &[]).unwrap();
        let c1 = ("C1".to_string(), space.parse("x^2 + y^2").unwrap());
        let one = ("one".to_string(), SymExpr::one());
        let drift = conservation_report(&traj, &[c1, one], &BTreeMap::new()).unwrap();
        assert!(drift[0].max_drift < 1e-10, "{}", drift[0].max_drift);
        assert_eq!(drift[1].max_drift, 0.0);
    }

    #[test]
    fn fourth_order_convergence() {
        let fl = flow(&["x", "y"], &["-y", "x"]);
        let err = |dt: f64| {
            let traj = integrate(&fl, &[1.0, 0.0], &[0.0, 0.0], 0.0, 2.0, dt).unwrap();
            let q = traj.q.last().unwrap();
            ((q[0] - 2f64.cos()).powi(2) + (q[1] - 2f64.sin()).powi(2)).sqrt()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn zero_flow_is_stationary() {
        let fl = flow(&["x", "y"], &["0", "0"]);
        let traj = integrate(&fl, &[0.3, -2.0], &[1.0, 4.0], 0.0, 1.0, 0.1).unwrap();
        for i in 0..traj.t.len() {
            assert_eq!(traj.q[i], vec![0.3, -2.0]);
            assert_eq!(traj.jacobi_matrix(i), DMatrix::identity(2, 2));
        }
    }

    #[test]
    fn auxiliary_flow_uses_the_transposed_jacobian() {
        // f = (y, 0): J = [[0,1],[0,0]]; q̄̇_x = 0, q̄̇_y = −q̄_x.
        let fl = flow(&["x", "y"], &["y", "0"]);
        let traj = integrate(&fl, &[0.0, 1.0], &[2.0, 0.0], 0.0, 1.5, 0.01).unwrap();
        let qb = traj.qbar.last().unwrap();
        assert!((qb[0] - 2.0).abs() < 1e-12 && (qb[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn blow_up_truncates_with_a_diagnostic() {
        let fl = flow(&["x"], &["x^2"]);
        let traj = integrate(&fl, &[1.0], &[0.0], 0.0, 2.0, 1e-2).unwrap();
        assert!(traj.diagnostic.is_some());
        assert!(traj.t.last().unwrap() < &1.1);
    }

    #[test]
    fn invalid_inputs() {
        let fl = flow(&["x"], &["x"]);
        assert!(matches!(integrate(&fl, &[1.0], &[0.0], 0.0, 1.0, 0.0), Err(DynamicsError::BadStep(_))));
        assert!(matches!(integrate(&fl, &[1.0, 2.0], &[0.0], 0.0, 1.0, 0.1), Err(DynamicsError::Dimension { .. })));
        let space = PhaseSpace::doubled(&["x"], &["k"]).unwrap();
        let err = Flow::new(&["x"], &[space.parse("k*x").unwrap()], &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, DynamicsError::Unbound(s) if s == "k"));
    }

    #[test]
    fn csv_header_and_rows() {
        let fl = flow(&["x", "y"], &["-y", "x"]);
        let traj = integrate(&fl, &[1.0, 0.0], &[0.5, 0.0], 0.0, 0.2, 0.1).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,q_1,q_2,qb_1,qb_2,detK,divint");
        assert_eq!(lines.count(), 3);
    }
}
