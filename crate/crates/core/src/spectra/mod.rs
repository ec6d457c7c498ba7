//! Spectra of one-dimensional emergent Hamiltonians on a finite grid.
//!
//! `H = κ d²/dx² + V(x)` is discretized with the three-point Laplacian.
//! With Dirichlet walls at `±L` the matrix is symmetric tridiagonal and its
//! lowest levels are found by Sturm-sequence bisection; the periodic ring
//! adds corner couplings and is diagonalized densely.

mod duffing;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use duffing::{duffing_constants_check, ConstantVerdict, DuffingConstants, DuffingReport, PowerSum, Verdict};

use crate::phasespace::{PhaseSpaceError, SymExpr};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("grid needs at least 64 points (got {0})")]
    GridTooSmall(usize),
    #[error("half-width must be positive and finite (got {0})")]
    BadHalfWidth(f64),
    #[error("requested {requested} levels from a {n}-point grid")]
    TooManyLevels { requested: usize, n: usize },
    #[error("potential is not finite at x = {0}")]
    NonFinitePotential(f64),
    #[error("potential depends on `{0}` besides the grid variable")]
    ExtraSymbol(String),
    #[error("spectrum has {levels} levels but the partition tail at β = {beta} may reach {bound:e}")]
    TailBound { levels: usize, beta: f64, bound: f64 },
    #[error("reference has {reference} values for {levels} levels")]
    ReferenceLength { reference: usize, levels: usize },
    #[error("duffing check: {0}")]
    Duffing(String),
    #[error(transparent)]
    Expr(#[from] PhaseSpaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// ψ(±L) = 0; points at `−L + ih`, `i = 1…n`, `h = 2L/(n+1)`.
    Dirichlet,
    /// Ring of `n` points at `−L + ih`, `i = 0…n−1`, `h = 2L/n`.
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

/// Lowest levels of a grid Hamiltonian, optionally with analytic values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub grid: GridSpec,
    pub eigenvalues: Vec<f64>,
    pub reference: Vec<f64>,
    pub max_abs_dev: Option<f64>,
}

impl SpectrumReport {
    /// Attach analytic values for the lowest levels.
    pub fn with_reference(mut self, reference: Vec<f64>) -> Result<Self, SpectraError> {
        if reference.len() > self.eigenvalues.len() {
            return Err(SpectraError::ReferenceLength { reference: reference.len(), levels: self.eigenvalues.len() });
        }
        self.max_abs_dev =
            Some(self.eigenvalues.iter().zip(&reference).map(|(e, r)| (e - r).abs()).fold(0.0, f64::max));
        self.reference = reference;
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// `E_k = k + ½`, the unit-frequency oscillator ladder.
pub fn oscillator_levels(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 + 0.5).collect()
}

/// Eigenvalues of the periodic free ring `−(1/2m) d²/dx²`: `2 sin²(πk/n)/(m h²)`
/// for `k = 0, ±1, ±2, …`, ascending.
pub fn free_ring_levels(mass: f64, half_width: f64, n: usize, count: usize) -> Vec<f64> {
    let h = 2.0 * half_width / n as f64;
    let mut levels: Vec<f64> = (0..n)
        .map(|k| 2.0 * (std::f64::consts::PI * k as f64 / n as f64).sin().powi(2) / (mass * h * h))
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.truncate(count);
    levels
}

fn sample_potential(potential: &SymExpr, var: &str, xs: &[f64]) -> Result<Vec<f64>, SpectraError> {
    if let Some(extra) = potential.symbols().into_iter().find(|s| s != var) {
        return Err(SpectraError::ExtraSymbol(extra));
    }
    let mut point = BTreeMap::new();
    xs.iter()
        .map(|&x| {
            point.insert(var.to_string(), x);
            let v = potential.evaluate(&point)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(SpectraError::NonFinitePotential(x))
            }
        })
        .collect()
}

/// Number of eigenvalues of the tridiagonal matrix (`diag`, `off`) below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of eigenvalues below `x` of the periodic tridiagonal matrix with
/// couplings `off[i]` between `i` and `i + 1 (mod n)`, by the inertia of an
/// LDLᵀ elimination whose only fill-in is the last column.
///
/// Near a degenerate pair the leading block shares the eigenvalue, so the
/// count is only reliable to roughly `1e-13 · ‖A‖` there.
fn cyclic_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let last = n - 1;
    // w = current entry in the last column of row i
    let mut w = off[last];
    let mut d = diag[0] - x;
    let mut tail = diag[last] - x;
    let mut count = 0;
    let guard = |p: f64, i: usize| if p == 0.0 { -f64::EPSILON * (diag[i].abs() + x.abs()).max(1.0) } else { p };
    for i in 0..last {
        let p = guard(d, i);
        if p < 0.0 {
            count += 1;
        }
        if i + 1 == last {
            let coupling = off[i] + w;
            tail -= coupling * coupling / p;
        } else {
            tail -= w * w / p;
            d = diag[i + 1] - x - off[i] * off[i] / p;
            w = -off[i] * w / p;
        }
    }
    if guard(tail, last) < 0.0 {
        count += 1;
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on an eigenvalue
/// counting function, starting from Gershgorin bounds.
fn bisect_eigenvalue(diag: &[f64], radius: impl Fn(usize) -> f64, k: usize, count: impl Fn(f64) -> usize) -> f64 {
    let mut lo = (0..diag.len()).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..diag.len()).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid.abs().max(1.0) {
            break;
        }
        if count(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let radius = |i: usize| {
        (if i > 0 { off[i - 1].abs() } else { 0.0 }) + (if i + 1 < diag.len() { off[i].abs() } else { 0.0 })
    };
    bisect_eigenvalue(diag, radius, k, |x| sturm_count(diag, off, x))
}

fn cyclic_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let radius = |i: usize| off[i].abs() + off[(i + n - 1) % n].abs();
    bisect_eigenvalue(diag, radius, k, |x| cyclic_count(diag, off, x))
}

/// Lowest `levels` eigenvalues of `kinetic · d²/dx² + V(x)` on `[−L, L]`.
pub fn grid_spectrum_1d(
    kinetic: f64,
    potential: &SymExpr,
    var: &str,
    half_width: f64,
    n: usize,
    levels: usize,
    boundary: BoundaryCondition,
) -> Result<SpectrumReport, SpectraError> {
    if n < 64 {
        return Err(SpectraError::GridTooSmall(n));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(SpectraError::BadHalfWidth(half_width));
    }
    if levels > n {
        return Err(SpectraError::TooManyLevels { requested: levels, n });
    }
    let (h, xs): (f64, Vec<f64>) = match boundary {
        BoundaryCondition::Dirichlet => {
            let h = 2.0 * half_width / (n + 1) as f64;
            (h, (1..=n).map(|i| -half_width + i as f64 * h).collect())
        }
        BoundaryCondition::Periodic => {
            let h = 2.0 * half_width / n as f64;
            (h, (0..n).map(|i| -half_width + i as f64 * h).collect())
        }
    };
    let v = sample_potential(potential, var, &xs)?;
    let diag: Vec<f64> = v.iter().map(|vi| vi - 2.0 * kinetic / (h * h)).collect();
    let off = kinetic / (h * h);
    let eigenvalues = match boundary {
        BoundaryCondition::Dirichlet => {
            let offs = vec![off; n - 1];
            (0..levels).map(|k| tridiagonal_eigenvalue(&diag, &offs, k)).collect()
        }
        BoundaryCondition::Periodic => {
            let offs = vec![off; n];
            (0..levels).map(|k| cyclic_eigenvalue(&diag, &offs, k)).collect()
        }
    };
    Ok(SpectrumReport { grid: GridSpec { half_width, n }, eigenvalues, reference: Vec::new(), max_abs_dev: None })
}

/// `e^{−β/2} / (1 − e^{−β})`.
pub fn unit_oscillator_partition(beta: f64) -> f64 {
    (-beta / 2.0).exp() / (1.0 - (-beta).exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionCheck {
    pub beta: f64,
    pub z_spectrum: f64,
    pub z_reference: f64,
    pub rel_error: f64,
    /// Bound on the omitted levels, assuming the last gap keeps recurring.
    pub tail_bound: f64,
}

/// `Σ e^{−βEₙ}` over the computed levels against `z_reference`. Fails when
/// the geometric tail estimate exceeds `tail_tolerance · z`.
pub fn partition_check(
    spectrum: &SpectrumReport,
    beta: f64,
    z_reference: f64,
    tail_tolerance: f64,
) -> Result<PartitionCheck, SpectraError> {
    let e = &spectrum.eigenvalues;
    let z_spectrum: f64 = e.iter().map(|en| (-beta * en).exp()).sum();
    let tail_bound = match e.len() {
        0 => f64::INFINITY,
        1 => (-beta * e[0]).exp(),
        len => {
            let gap = (e[len - 1] - e[len - 2]).max(0.0);
            let r = (-beta * gap).exp();
            if r >= 1.0 {
                f64::INFINITY
            } else {
                (-beta * e[len - 1]).exp() * r / (1.0 - r)
            }
        }
    };
    if tail_bound > tail_tolerance * z_spectrum {
        return Err(SpectraError::TailBound { levels: e.len(), beta, bound: tail_bound });
    }
    Ok(PartitionCheck { beta, z_spectrum, z_reference, rel_error: (z_spectrum - z_reference).abs() / z_reference, tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::PhaseSpace;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn v(text: &str) -> SymExpr {
        PhaseSpace::doubled(&["x"], &[]).unwrap().parse(text).unwrap()
    }

    #[test]
    fn unit_oscillator_ladder() {
        let s = grid_spectrum_1d(-0.5, &v("x^2/2"), "x", 10.0, 2000, 5, BoundaryCondition::Dirichlet).unwrap();
        let s = s.with_reference(oscillator_levels(5)).unwrap();
        assert!(s.max_abs_dev.unwrap() < 1e-3, "{:?}", s.eigenvalues);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn periodic_count_agrees_with_dense_solver() {
        let n = 60;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64) - 3.0).collect();
        let off: Vec<f64> = (0..n).map(|i| 0.5 + (i % 3) as f64).collect();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone()));
        for i in 0..n {
            let j = (i + 1) % n;
            m[(i, j)] += off[i];
            m[(j, i)] += off[i];
        }
        let mut dense: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        for k in [0, 1, 2, 17, 30, n - 1] {
            let e = cyclic_eigenvalue(&diag, &off, k);
            assert!((e - dense[k]).abs() < 1e-9, "level {k}: {e} vs {}", dense[k]);
        }
    }

    #[test]
    fn bisection_agrees_with_dense_solver() {
        let n = 80;
        let s = grid_spectrum_1d(-0.5, &v("x^4 - x"), "x", 4.0, n, 6, BoundaryCondition::Dirichlet).unwrap();
        let h = 8.0 / (n + 1) as f64;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let x = -4.0 + (i + 1) as f64 * h;
            m[(i, i)] = 1.0 / (h * h) + x.powi(4) - x;
            if i + 1 < n {
                m[(i, i + 1)] = -0.5 / (h * h);
                m[(i + 1, i)] = -0.5 / (h * h);
            }
        }
        let mut dense: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        for (a, b) in s.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn second_order_grid_convergence() {
        let err = |n| {
            let s = grid_spectrum_1d(-0.5, &v("x^2/2"), "x", 10.0, n, 1, BoundaryCondition::Dirichlet).unwrap();
            (s.eigenvalues[0] - 0.5).abs()
        };
        let ratio = err(400) / err(800);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn reflection_symmetry() {
        let a = grid_spectrum_1d(-0.5, &v("x^4 + x^3"), "x", 6.0, 300, 4, BoundaryCondition::Dirichlet).unwrap();
        let b = grid_spectrum_1d(-0.5, &v("x^4 - x^3"), "x", 6.0, 300, 4, BoundaryCondition::Dirichlet).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_free_ring() {
        let mass = 2.0;
        let s = grid_spectrum_1d(-0.5 / mass, &v("0"), "x", 5.0, 128, 7, BoundaryCondition::Periodic).unwrap();
        let oracle = free_ring_levels(mass, 5.0, 128, 7);
        // The ±k pairs are degenerate, which costs the inertia count a few
        // digits relative to the matrix norm.
        for (a, b) in s.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // Continuum limit (πk/L)²/(2m) for the first excited pair.
        let continuum = (std::f64::consts::PI / 5.0).powi(2) / (2.0 * mass);
        assert!((s.eigenvalues[1] - continuum).abs() < 1e-3 && (s.eigenvalues[2] - continuum).abs() < 1e-3);
    }

    #[test]
    fn partition_function() {
        let s = grid_spectrum_1d(-0.5, &v("x^2/2"), "x", 10.0, 2000, 20, BoundaryCondition::Dirichlet).unwrap();
        let c = partition_check(&s, 2.0, unit_oscillator_partition(2.0), 1e-6).unwrap();
        assert!(c.rel_error < 1e-4, "{c:?}");
        // Ground-state dominance at large β.
        let big = partition_check(&s, 30.0, (-15.0f64).exp(), 1e-6).unwrap();
        assert!(big.rel_error < 1e-3);
        // Truncation: 10 levels at β = 1 leave a visible tail, flagged as such.
        let s50 = grid_spectrum_1d(-0.5, &v("x^2/2"), "x", 10.0, 2000, 50, BoundaryCondition::Dirichlet).unwrap();
        let mut s10 = s50.clone();
        s10.eigenvalues.truncate(10);
        let full = partition_check(&s50, 1.0, unit_oscillator_partition(1.0), 1e-6).unwrap();
        let diff = full.z_spectrum - s10.eigenvalues.iter().map(|e| (-e).exp()).sum::<f64>();
        let exact_tail: f64 = (10..50).map(|k| (-(k as f64 + 0.5)).exp()).sum();
        assert!((diff - exact_tail).abs() < 1e-6);
        assert!(matches!(partition_check(&s10, 1.0, 1.0, 1e-6), Err(SpectraError::TailBound { .. })));
    }

    #[test]
    fn input_validation() {
        let pot = v("x^2");
        assert!(matches!(grid_spectrum_1d(-0.5, &pot, "x", 1.0, 10, 1, BoundaryCondition::Dirichlet), Err(SpectraError::GridTooSmall(10))));
        assert!(matches!(
            grid_spectrum_1d(-0.5, &pot, "x", 1.0, 64, 65, BoundaryCondition::Dirichlet),
            Err(SpectraError::TooManyLevels { .. })
        ));
        let other = PhaseSpace::doubled(&["x", "y"], &[]).unwrap().parse("x*y").unwrap();
        assert!(matches!(grid_spectrum_1d(-0.5, &other, "x", 1.0, 64, 1, BoundaryCondition::Dirichlet), Err(SpectraError::ExtraSymbol(_))));
    }

    #[test]
    fn json_shape() {
        let s = grid_spectrum_1d(-0.5, &v("x^2/2"), "x", 10.0, 200, 2, BoundaryCondition::Dirichlet)
            .unwrap()
            .with_reference(oscillator_levels(2))
            .unwrap();
        let value: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(value["grid"]["L"], 10.0);
        assert_eq!(value["grid"]["n"], 200);
        assert_eq!(value["eigenvalues"].as_array().unwrap().len(), 2);
        assert!(value["max_abs_dev"].is_number());
    }
}
