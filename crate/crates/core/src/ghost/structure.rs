//! Kinetic-structure conditions on actions that are "Euler-like":
//! `𝒜 = Σᵢ αᵢ Σₜ qᵢ(t) δ𝒜/δqᵢ(t) Δt`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{GhostError, LatticeFunctional};
use crate::linalg;
use crate::phasespace::Coeff;

/// `|𝒜 − Σᵢ α_{fam(i)} vᵢ ∂𝒜/∂vᵢ|` at `point`, with the gradient estimated
/// by central differences of step `step` over every dynamical variable.
///
/// `alpha` has one weight per field family of the functional. Symbols of
/// the action that are not dynamical must be present in `point` too.
pub fn euler_functional_check(
    functional: &LatticeFunctional,
    alpha: &[f64],
    point: &BTreeMap<String, f64>,
    step: f64,
) -> Result<f64, GhostError> {
    if alpha.len() != functional.families.len() {
        return Err(GhostError::AlphaLength { expected: functional.families.len(), found: alpha.len() });
    }
    let action = &functional.action;
    let base = action.evaluate(point)?;
    let mut probe = point.clone();
    let mut euler = 0.0;
    for (i, (v, &fam)) in functional.variables.iter().zip(&functional.family_of).enumerate() {
        let weight = alpha[fam];
        if weight == 0.0 || functional.gradient[i].is_zero() {
            continue;
        }
        let x = *point.get(v).ok_or_else(|| GhostError::MissingValue(v.clone()))?;
        probe.insert(v.clone(), x + step);
        let up = action.evaluate(&probe)?;
        probe.insert(v.clone(), x - step);
        let down = action.evaluate(&probe)?;
        probe.insert(v.clone(), x);
        euler += weight * x * (up - down) / (2.0 * step);
    }
    Ok((base - euler).abs())
}

/// Solution of the kinetic-structure equations for a kinetic form
/// `L_kin = Σ Bᵢⱼ qᵢ q̇ⱼ`.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaReport {
    pub alpha: Vec<Vec<String>>,
    pub rank: usize,
    pub idempotent: bool,
    /// α equals `diag(0, …, 0, 1, …, 1)` with `rank` trailing ones.
    pub alpha_block_form: bool,
    /// B vanishes outside its upper-right `(N−r) × r` block.
    pub b_block_form: bool,
}

impl AlphaReport {
    pub fn passed(&self, n: usize) -> bool {
        self.idempotent && self.rank * 2 == n && self.alpha_block_form && self.b_block_form
    }
}

/// Kinetic form of the doubled action `Σ q̄ₐ q̇ₐ ≃ −Σ qₐ q̄̇ₐ` in the
/// ordering `(q₁…q_N, q̄₁…q̄_N)`: `B = [[0, −I], [0, 0]]`.
pub fn doubled_kinetic_form(n: usize) -> Vec<Vec<BigRational>> {
    let mut b = vec![vec![BigRational::zero(); 2 * n]; 2 * n];
    for (a, row) in b.iter_mut().enumerate().take(n) {
        row[n + a] = -BigRational::one();
    }
    b
}

/// Find α with `(B − Bᵀ)α = B`, `Bα = B`, `Bᵀα = 0`, and certify that it is
/// idempotent of rank N/2 with the expected block shapes.
pub fn alpha_structure_check(b: &[Vec<BigRational>]) -> Result<(Vec<Vec<BigRational>>, AlphaReport), GhostError> {
    let n = b.len();
    if b.iter().any(|row| row.len() != n) {
        return Err(GhostError::NotSquare);
    }
    for (i, row) in b.iter().enumerate() {
        if let Some(j) = (0..i).find(|&j| !row[j].is_zero()) {
            return Err(GhostError::NotUpperTriangular(i, j));
        }
    }
    if n % 2 == 1 {
        return Err(GhostError::OddDimension(n));
    }
    let bm: linalg::Matrix = b.iter().map(|r| r.iter().cloned().map(Coeff::from_rational).collect()).collect();
    let bt = linalg::transpose(&bm);
    let skew: linalg::Matrix =
        bm.iter().zip(&bt).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect();
    // Stack the three conditions; each column of α solves its own system.
    let system: linalg::Matrix = skew.iter().chain(&bm).chain(&bt).cloned().collect();
    let mut alpha = vec![vec![Coeff::zero(); n]; n];
    for j in 0..n {
        let rhs: Vec<Coeff> =
            (0..n).map(|i| bm[i][j].clone()).chain((0..n).map(|i| bm[i][j].clone())).chain((0..n).map(|_| Coeff::zero())).collect();
        let col = linalg::solve(&system, &rhs).ok_or(GhostError::NoIdempotentSolution)?;
        for (i, v) in col.into_iter().enumerate() {
            alpha[i][j] = v;
        }
    }
    let idempotent = linalg::mul(&alpha, &alpha) == alpha;
    if !idempotent {
        return Err(GhostError::NoIdempotentSolution);
    }
    let rank = linalg::rank(&alpha);
    let alpha_block_form = (0..n).all(|i| {
        (0..n).all(|j| {
            let expected = if i == j && i >= n - rank { Coeff::one() } else { Coeff::zero() };
            alpha[i][j] == expected
        })
    });
    let b_block_form = (0..n).all(|i| (0..n).all(|j| (i < n - rank && j >= n - rank) || bm[i][j].is_zero()));
    let alpha_q: Vec<Vec<BigRational>> =
        alpha.iter().map(|r| r.iter().map(|c| c.as_rational().cloned().expect("rational input")).collect()).collect();
    let report = AlphaReport {
        alpha: alpha_q.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(),
        rank,
        idempotent,
        alpha_block_form,
        b_block_form,
    };
    Ok((alpha_q, report))
}
