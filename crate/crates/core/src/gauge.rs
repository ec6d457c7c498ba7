//! Gauge fixing, linear canonical maps and reduction to the physical surface.
//!
//! A gauge condition `χ` must commute with every second-class constraint and
//! fail to commute with the first-class `φ`. A linear canonical map whose
//! `P₁` row is `χ` then splits phase space into the gauge pair `(Q₁, P₁)`,
//! N constraint pairs and N−1 physical pairs. On the physical surface
//! `P₁ = P_{1+i} = Q_{1+i} = 0` the Hamiltonian becomes `K(P̄, Q̄, Q₁)`, and
//! the root `Q₁*` of `φ|Γ* = 0` gives the emergent Hamiltonian
//! `K* = K(Q₁*)`.
//!
//! The root is only accepted when it is unique as a polynomial identity:
//! either `φ|Γ*` is affine in `Q₁`, or it is a perfect power
//! `c (Q₁ − r)ⁿ`. Anything else is refused rather than branch-picked.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dirac::{DiracError, ExtendedSystem, Fraction, InformationLoss};
use crate::phasespace::{Coeff, PhaseSpace, PhaseSpaceError, SymExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaugeError {
    #[error("map must be {expected}×{expected}, got {rows} rows with {cols} columns")]
    Dimension { expected: usize, rows: usize, cols: usize },
    #[error("map needs {expected} labels, got {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("duplicate or reserved label `{0}`")]
    BadLabel(String),
    #[error("map entry ({row}, {col}) = `{expr}` depends on phase-space variables")]
    NonParametricEntry { row: usize, col: usize, expr: String },
    #[error("row {row} (`{label}`) is not affine in the phase-space variables")]
    NotAffine { row: usize, label: String },
    #[error("map is not symplectic: (MᵀJM)[{row}][{col}] = {found}, expected {expected}")]
    NonSymplectic { row: usize, col: usize, found: String, expected: String },
    #[error("gauge row P₁ = `{found}` does not reproduce χ = `{expected}`")]
    GaugeRowMismatch { expected: String, found: String },
    #[error("{{χ, {label}}} = {bracket} is not zero")]
    GaugeNotCommuting { label: String, bracket: String },
    #[error("{{χ, φ}} vanishes identically; χ does not fix the gauge")]
    GaugeDegenerate,
    #[error("φ restricted to the physical surface is degree {degree} in Q₁ and not a perfect power: {expr} (Gribov risk)")]
    Gribov { degree: u32, expr: String },
    #[error("φ restricted to the physical surface does not depend on Q₁")]
    ZeroQ1Coefficient,
    #[error("K* = K(Q₁*) is not a polynomial: {0}")]
    NonPolynomial(String),
    #[error("the reduced expression still depends on Q₁: {0}")]
    ResidualGaugeDependence(String),
    #[error(transparent)]
    PhaseSpace(#[from] PhaseSpaceError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
}

/// Affine map `Z = M z + b` from the ordered old phase vector `z`
/// (the canonical pairs of the source space, flattened) to new variables
/// listed as conjugate pairs `(Q₁, P₁, Q₂, P₂, …)`.
///
/// Entries may depend on parameters (and `√2`) but not on phase-space
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMap {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<SymExpr>>,
    pub offset: Vec<SymExpr>,
}

fn old_vector(space: &PhaseSpace) -> Vec<String> {
    space.pairs().iter().flat_map(|(q, p)| [q.clone(), p.clone()]).collect()
}

/// `J z` component: for pair-ordered vectors `J = diag([[0,1],[-1,0]], …)`.
fn j_entry(i: usize, j: usize) -> i64 {
    if i / 2 != j / 2 {
        0
    } else if i % 2 == 0 && j == i + 1 {
        1
    } else if i % 2 == 1 && j + 1 == i {
        -1
    } else {
        0
    }
}

fn mat_mul(a: &[Vec<SymExpr>], b: &[Vec<SymExpr>]) -> Vec<Vec<SymExpr>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = SymExpr::zero();
                    for (k, aik) in row.iter().enumerate() {
                        if !aik.is_zero() && !b[k][j].is_zero() {
                            acc += &(aik * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn mat_t(a: &[Vec<SymExpr>]) -> Vec<Vec<SymExpr>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

fn j_matrix(n: usize) -> Vec<Vec<SymExpr>> {
    (0..n).map(|i| (0..n).map(|j| SymExpr::int(j_entry(i, j))).collect()).collect()
}

impl CanonicalMap {
    /// The identity map, relabelling each old variable by itself.
    pub fn identity(space: &PhaseSpace) -> Self {
        let labels = old_vector(space);
        let n = labels.len();
        let matrix = (0..n).map(|i| (0..n).map(|j| SymExpr::int((i == j) as i64)).collect()).collect();
        Self { labels, matrix, offset: vec![SymExpr::zero(); n] }
    }

    /// Extract the matrix from explicit new-variable expressions.
    pub fn from_rows(space: &PhaseSpace, labels: Vec<String>, rows: &[SymExpr]) -> Result<Self, GaugeError> {
        let old = old_vector(space);
        if rows.len() != old.len() || labels.len() != old.len() {
            return Err(GaugeError::LabelCount { expected: old.len(), found: rows.len().min(labels.len()) });
        }
        let zero: BTreeMap<String, SymExpr> = old.iter().map(|s| (s.clone(), SymExpr::zero())).collect();
        let mut matrix = Vec::with_capacity(rows.len());
        let mut offset = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let coeffs: Vec<SymExpr> = old.iter().map(|s| row.differentiate(s)).collect();
            let b = row.substitute(&zero)?;
            let mut rebuilt = b.clone();
            for (c, s) in coeffs.iter().zip(&old) {
                rebuilt += &(c * &SymExpr::symbol(s));
            }
            if rebuilt != *row {
                return Err(GaugeError::NotAffine { row: r, label: labels[r].clone() });
            }
            matrix.push(coeffs);
            offset.push(b);
        }
        let map = Self { labels, matrix, offset };
        map.check_entries(space)?;
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    fn check_entries(&self, space: &PhaseSpace) -> Result<(), GaugeError> {
        for (row, r) in self.matrix.iter().chain(std::iter::once(&self.offset)).enumerate() {
            for (col, e) in r.iter().enumerate() {
                if e.symbols().iter().any(|s| !space.is_param(s)) {
                    return Err(GaugeError::NonParametricEntry { row, col, expr: e.to_string() });
                }
            }
        }
        Ok(())
    }

    /// Dimension, label and parameter-only checks (not symplecticity).
    pub fn check_shape(&self, space: &PhaseSpace) -> Result<(), GaugeError> {
        let n = 2 * space.pairs().len();
        if self.labels.len() != n {
            return Err(GaugeError::LabelCount { expected: n, found: self.labels.len() });
        }
        let cols = self.matrix.iter().map(Vec::len).find(|&c| c != n).unwrap_or(n);
        if self.matrix.len() != n || cols != n || self.offset.len() != n {
            return Err(GaugeError::Dimension { expected: n, rows: self.matrix.len(), cols });
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &self.labels {
            if !seen.insert(l) || space.is_param(l) {
                return Err(GaugeError::BadLabel(l.clone()));
            }
        }
        self.check_entries(space)
    }

    /// `MᵀJM`.
    pub fn mtjm(&self) -> Vec<Vec<SymExpr>> {
        let j = j_matrix(self.dim());
        mat_mul(&mat_mul(&mat_t(&self.matrix), &j), &self.matrix)
    }

    /// Exact symplectic certificate `MᵀJM = J`.
    pub fn check_symplectic(&self) -> Result<(), GaugeError> {
        let prod = self.mtjm();
        for (i, row) in prod.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = SymExpr::int(j_entry(i, j));
                if *v != expected {
                    return Err(GaugeError::NonSymplectic {
                        row: i,
                        col: j,
                        found: v.to_string(),
                        expected: expected.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `M⁻¹ = J⁻¹ Mᵀ J = −J Mᵀ J` for a symplectic `M`.
    pub fn inverse_matrix(&self) -> Vec<Vec<SymExpr>> {
        let j = j_matrix(self.dim());
        let neg_j: Vec<Vec<SymExpr>> = j.iter().map(|r| r.iter().map(|e| -e).collect()).collect();
        mat_mul(&mat_mul(&neg_j, &mat_t(&self.matrix)), &j)
    }

    /// New variables as expressions in the old ones.
    pub fn row_expr(&self, space: &PhaseSpace, i: usize) -> SymExpr {
        let mut acc = self.offset[i].clone();
        for (m, s) in self.matrix[i].iter().zip(old_vector(space)) {
            if !m.is_zero() {
                acc += &(m * &SymExpr::symbol(&s));
            }
        }
        acc
    }

    /// Phase space of the new variables, with the parameters of `space`.
    pub fn target_space(&self, space: &PhaseSpace) -> Result<PhaseSpace, GaugeError> {
        let pairs = self.labels.chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect();
        Ok(PhaseSpace::from_pairs(pairs, space.params())?)
    }

    /// Bindings expressing each old variable through the new ones.
    pub fn old_in_new(&self, space: &PhaseSpace) -> BTreeMap<String, SymExpr> {
        let inv = self.inverse_matrix();
        let shifted: Vec<SymExpr> =
            self.labels.iter().zip(&self.offset).map(|(l, b)| &SymExpr::symbol(l) - b).collect();
        old_vector(space)
            .into_iter()
            .zip(&inv)
            .map(|(name, row)| {
                let mut acc = SymExpr::zero();
                for (m, z) in row.iter().zip(&shifted) {
                    if !m.is_zero() {
                        acc += &(m * z);
                    }
                }
                (name, acc)
            })
            .collect()
    }

    /// Rewrite `e` (over `space`) in the new variables.
    pub fn apply(&self, space: &PhaseSpace, e: &SymExpr) -> Result<SymExpr, GaugeError> {
        Ok(e.substitute(&self.old_in_new(space))?)
    }

    pub fn q1(&self) -> &str {
        &self.labels[0]
    }

    pub fn p1(&self) -> &str {
        &self.labels[1]
    }

    /// Labels of the N constraint pairs `(Q_{1+i}, P_{1+i})`.
    pub fn constraint_pairs(&self, n: usize) -> Vec<(&str, &str)> {
        (1..=n).map(|k| (self.labels[2 * k].as_str(), self.labels[2 * k + 1].as_str())).collect()
    }

    /// Labels of the remaining physical pairs `(Q̄, P̄)`.
    pub fn physical_pairs(&self, n: usize) -> Vec<(String, String)> {
        self.labels[2 * (n + 1)..].chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect()
    }

    /// Bindings for the physical surface: `P₁ = 0` and every constraint pair zero.
    pub fn surface_bindings(&self, n: usize) -> BTreeMap<String, SymExpr> {
        let mut out = BTreeMap::new();
        out.insert(self.p1().to_string(), SymExpr::zero());
        for (q, p) in self.constraint_pairs(n) {
            out.insert(q.to_string(), SymExpr::zero());
            out.insert(p.to_string(), SymExpr::zero());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReport {
    /// `{χ, φ}`, nonzero for an admissible gauge.
    pub chi_phi: SymExpr,
    /// `{χ, φ_i}` for every second-class constraint.
    pub chi_second_class: Vec<(String, SymExpr)>,
}

/// Certify `{χ, φ_i} = 0` for every second-class constraint and `{χ, φ} ≠ 0`.
pub fn validate_gauge(sys: &ExtendedSystem, il: &InformationLoss, chi: &SymExpr) -> Result<GaugeReport, GaugeError> {
    let mut chi_second_class = Vec::new();
    for c in il.set.second_class() {
        let b = sys.bracket(chi, &c.expr)?;
        if !b.is_zero() {
            return Err(GaugeError::GaugeNotCommuting { label: c.label.clone(), bracket: b.to_string() });
        }
        chi_second_class.push((c.label.clone(), b));
    }
    let chi_phi = sys.bracket(chi, &il.phi)?;
    if chi_phi.is_zero() {
        return Err(GaugeError::GaugeDegenerate);
    }
    Ok(GaugeReport { chi_phi, chi_second_class })
}

/// How uniqueness of the root `Q₁*` was certified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootCertificate {
    /// `φ|Γ*` is affine in `Q₁`.
    Linear,
    /// `φ|Γ* = c (Q₁ − r)ⁿ` with `n ≥ 2`.
    PerfectPower(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub space: PhaseSpace,
    pub map: CanonicalMap,
    pub chi: SymExpr,
    /// First-class constraint in the new variables.
    pub phi: SymExpr,
    /// `φ` on the physical surface, a polynomial in `Q₁`.
    pub phi_surface: SymExpr,
    /// `K(P̄, Q̄, Q₁)`.
    pub k: SymExpr,
    /// `Q₁*` as an explicit quotient.
    pub q1_star: Fraction,
    /// `Q₁*` when the quotient divides exactly.
    pub q1_star_poly: Option<SymExpr>,
    pub kstar: SymExpr,
    pub certificate: RootCertificate,
    pub dim: usize,
}

impl ReducedSystem {
    pub fn physical_pairs(&self) -> Vec<(String, String)> {
        self.map.physical_pairs(self.dim)
    }
}

/// Divide `num` by the single-term `den`, allowing negative powers of
/// parameters only.
fn divide(space: &PhaseSpace, num: &SymExpr, den: &SymExpr) -> Option<SymExpr> {
    if num.is_zero() {
        return Some(SymExpr::zero());
    }
    num.exact_div(den, |s| space.is_param(s))
}

/// `Σ k_j xʲ` at `x = num/den`, cleared of the denominator.
fn eval_at_fraction(space: &PhaseSpace, coeffs: &[SymExpr], x: &Fraction) -> Result<SymExpr, GaugeError> {
    let n = coeffs.len().saturating_sub(1) as u32;
    let mut total = SymExpr::zero();
    for (j, kj) in coeffs.iter().enumerate() {
        if kj.is_zero() {
            continue;
        }
        let term = &(kj * &x.numerator.pow(j as u32)) * &x.denominator.pow(n - j as u32);
        total += &term;
    }
    let den = x.denominator.pow(n);
    divide(space, &total, &den).ok_or_else(|| GaugeError::NonPolynomial(format!("({total}) / ({den})")))
}

/// Transform, restrict to the physical surface and solve the first-class
/// constraint for `Q₁`.
pub fn reduce(
    sys: &ExtendedSystem,
    il: &InformationLoss,
    chi: &SymExpr,
    map: &CanonicalMap,
) -> Result<ReducedSystem, GaugeError> {
    let space = &sys.space;
    let n = sys.dim();
    map.check_shape(space)?;
    if map.labels.len() != 4 * n {
        return Err(GaugeError::LabelCount { expected: 4 * n, found: map.labels.len() });
    }
    map.check_symplectic()?;
    let p1_row = map.row_expr(space, 1);
    if p1_row != *chi {
        return Err(GaugeError::GaugeRowMismatch { expected: chi.to_string(), found: p1_row.to_string() });
    }
    let target = map.target_space(space)?;
    let to_new = map.old_in_new(space);
    let h = sys.h.substitute(&to_new)?;
    let phi = il.phi.substitute(&to_new)?;
    let chi_new = chi.substitute(&to_new)?;

    let surface = map.surface_bindings(n);
    let k = h.substitute(&surface)?;
    let phi_surface = phi.substitute(&surface)?;
    let q1 = map.q1();

    let coeffs = phi_surface
        .coefficients_in(q1)
        .ok_or_else(|| GaugeError::Gribov { degree: 0, expr: phi_surface.to_string() })?;
    let degree = (coeffs.len() - 1) as u32;
    if degree == 0 {
        return Err(GaugeError::ZeroQ1Coefficient);
    }
    let lead = &coeffs[degree as usize];
    let (q1_star, certificate) = if degree == 1 {
        (Fraction { numerator: -&coeffs[0], denominator: coeffs[1].clone() }, RootCertificate::Linear)
    } else {
        // c_n (Q₁ − r)ⁿ with r = −c_{n−1}/(n c_n); accept only when the
        // expansion reproduces every coefficient.
        let den = lead.scale(&Coeff::from_int(degree as i64));
        let root = divide(space, &-&coeffs[degree as usize - 1], &den)
            .or_else(|| divide(&target, &-&coeffs[degree as usize - 1], &den))
            .ok_or_else(|| GaugeError::Gribov { degree, expr: phi_surface.to_string() })?;
        let candidate = lead * &(&SymExpr::symbol(q1) - &root).pow(degree);
        if candidate != phi_surface {
            return Err(GaugeError::Gribov { degree, expr: phi_surface.to_string() });
        }
        (Fraction { numerator: root, denominator: SymExpr::one() }, RootCertificate::PerfectPower(degree))
    };
    let q1_star_poly = divide(space, &q1_star.numerator, &q1_star.denominator);
    let k_coeffs = k
        .coefficients_in(q1)
        .ok_or_else(|| GaugeError::NonPolynomial(k.to_string()))?;
    let kstar = match &q1_star_poly {
        Some(r) => k.substitute(&PhaseSpace::bindings([(q1, r.clone())]))?,
        None => eval_at_fraction(space, &k_coeffs, &q1_star)?,
    };
    if kstar.depends_on(q1) {
        return Err(GaugeError::ResidualGaugeDependence(kstar.to_string()));
    }
    Ok(ReducedSystem {
        space: target,
        map: map.clone(),
        chi: chi_new,
        phi,
        phi_surface,
        k,
        q1_star,
        q1_star_poly,
        kstar,
        certificate,
        dim: n,
    })
}

/// Compare `{f, g}` in the full new-variable space, restricted to the
/// physical surface, with the canonical bracket of the restricted functions
/// over the physical pairs. Returns `(restricted full bracket, reduced
/// bracket, residual)`.
///
/// Both sides agree for functions that do not depend on the gauge pair; in
/// general the reduced bracket is the Dirac bracket and the residual exposes
/// the difference.
pub fn reduced_bracket_check(
    f: &SymExpr,
    g: &SymExpr,
    reduced: &ReducedSystem,
) -> Result<(SymExpr, SymExpr, SymExpr), GaugeError> {
    let mut surface = reduced.map.surface_bindings(reduced.dim);
    let q1 = reduced.map.q1().to_string();
    let restrict = |e: &SymExpr, surface: &BTreeMap<String, SymExpr>| -> Result<SymExpr, GaugeError> {
        let r = e.substitute(surface)?;
        if r.depends_on(&q1) {
            return Err(GaugeError::ResidualGaugeDependence(r.to_string()));
        }
        Ok(r)
    };
    if let Some(root) = &reduced.q1_star_poly {
        surface.insert(q1.clone(), root.clone());
    }
    let full = reduced.space.poisson_bracket(f, g)?;
    let lhs = restrict(&full, &surface)?;
    let (fs, gs) = (restrict(f, &surface)?, restrict(g, &surface)?);
    let physical = PhaseSpace::from_pairs(reduced.physical_pairs(), reduced.space.params())?;
    let rhs = physical.poisson_bracket(&fs, &gs)?;
    let residual = &lhs - &rhs;
    Ok((lhs, rhs, residual))
}

/// A declarative substitution applied to results, e.g. `d → −m·hbar/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaling {
    pub symbol: String,
    pub replacement: SymExpr,
}

/// Apply rescalings in order, each as a simultaneous substitution.
pub fn apply_rescalings(e: &SymExpr, rescalings: &[Rescaling]) -> Result<SymExpr, GaugeError> {
    let mut out = e.clone();
    for r in rescalings {
        out = out.substitute(&PhaseSpace::bindings([(r.symbol.clone(), r.replacement.clone())]))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{build_extended_system, information_loss_constraint, ChargeSpec};

    fn pendulum() -> (ExtendedSystem, InformationLoss) {
        let space = PhaseSpace::doubled(&["x", "y"], &["a1"]).unwrap();
        let f = vec![space.parse("-y").unwrap(), space.parse("x").unwrap()];
        let sys = build_extended_system(space, f).unwrap();
        let spec = ChargeSpec::new(vec![sys.space.parse("x^2 + y^2").unwrap()], vec![sys.space.parse("a1").unwrap()])
            .unwrap();
        let il = information_loss_constraint(&sys, &spec).unwrap();
        (sys, il)
    }

    fn pendulum_map(space: &PhaseSpace) -> CanonicalMap {
        let rows = [
            ("Q1", "p_y"),
            ("P1", "pb_y - y"),
            ("Q2", "pb_x"),
            ("P2", "p_x - qb_x"),
            ("Q3", "pb_y"),
            ("P3", "p_y - qb_y"),
            ("Qbar", "p_x"),
            ("Pbar", "pb_x - x"),
        ];
        let labels = rows.iter().map(|(l, _)| l.to_string()).collect();
        let exprs: Vec<_> = rows.iter().map(|(_, e)| space.parse(e).unwrap()).collect();
        CanonicalMap::from_rows(space, labels, &exprs).unwrap()
    }

    #[test]
    fn pendulum_gauge() {
        let (sys, il) = pendulum();
        let chi = sys.space.parse("pb_y - y").unwrap();
        let rep = validate_gauge(&sys, &il, &chi).unwrap();
        assert_eq!(rep.chi_phi, sys.space.parse("pb_x - x").unwrap());
        assert_eq!(rep.chi_second_class.len(), 4);
        let bad = sys.space.parse("x").unwrap();
        assert!(matches!(validate_gauge(&sys, &il, &bad), Err(GaugeError::GaugeNotCommuting { .. })));
    }

    #[test]
    fn pendulum_reduction() {
        let (sys, il) = pendulum();
        let chi = sys.space.parse("pb_y - y").unwrap();
        let map = pendulum_map(&sys.space);
        map.check_symplectic().unwrap();
        let red = reduce(&sys, &il, &chi, &map).unwrap();
        let t = &red.space;
        assert_eq!(red.k, t.parse("-Pbar*Q1").unwrap());
        assert_eq!(red.q1_star_poly, Some(t.parse("-a1*Pbar").unwrap()));
        assert_eq!(red.kstar, t.parse("a1*Pbar^2").unwrap());
        assert_eq!(red.certificate, RootCertificate::Linear);
        let (pbar, qbar) = (SymExpr::symbol("Pbar"), SymExpr::symbol("Qbar"));
        let (l, r, res) = reduced_bracket_check(&pbar, &qbar, &red).unwrap();
        assert_eq!(l, SymExpr::int(-1));
        assert_eq!(r, SymExpr::int(-1));
        assert!(res.is_zero());
        let (_, _, res) = reduced_bracket_check(&pbar.pow(2), &qbar.pow(2), &red).unwrap();
        assert!(res.is_zero());
    }

    #[test]
    fn identity_map_is_symplectic_and_inert() {
        let (sys, _) = pendulum();
        let id = CanonicalMap::identity(&sys.space);
        id.check_symplectic().unwrap();
        assert_eq!(id.apply(&sys.space, &sys.h).unwrap(), sys.h);
    }

    #[test]
    fn non_symplectic_map_names_entry() {
        let (sys, _) = pendulum();
        let mut id = CanonicalMap::identity(&sys.space);
        id.matrix[0][0] = SymExpr::int(2);
        match id.check_symplectic() {
            Err(GaugeError::NonSymplectic { row: 0, col: 1, found, expected }) => {
                assert_eq!(found, "2");
                assert_eq!(expected, "1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_gauge_row_rejected() {
        let (sys, il) = pendulum();
        let chi = sys.space.parse("pb_y - y").unwrap();
        let map = CanonicalMap::identity(&sys.space);
        assert!(matches!(reduce(&sys, &il, &chi, &map), Err(GaugeError::GaugeRowMismatch { .. })));
    }

    #[test]
    fn inverse_is_exact() {
        let (sys, _) = pendulum();
        let map = pendulum_map(&sys.space);
        let back = map.old_in_new(&sys.space);
        for (i, _) in map.labels.iter().enumerate() {
            let row = map.row_expr(&sys.space, i);
            assert_eq!(row.substitute(&back).unwrap(), SymExpr::symbol(&map.labels[i]));
        }
    }
}
