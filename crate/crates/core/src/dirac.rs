//! The doubled ('t Hooft) Hamiltonian system and its Dirac–Bergmann analysis.
//!
//! For dynamics `q̇_a = f_a(q)` the extended Lagrangian `L̄ = Σ q̄_a (q̇_a − f_a)`
//! is first order, so its Legendre transform is singular and yields the 2N
//! primary constraints `φ₁ᵃ = p_a − q̄_a`, `φ₂ᵃ = p̄_a`. Their bracket matrix
//! is constant with unit determinant, so the multipliers are fixed and no
//! secondary constraints arise. Adding the information-loss constraint
//! `φ₀ = H̄ − Σ a_i C_i` makes the matrix degenerate by exactly one; its null
//! vector `e` assembles the single first-class constraint `φ = Σ e_i φ_i`.
//!
//! Weak equalities are decided by substituting the explicit second-class
//! solution `p_a → q̄_a`, `p̄_a → 0`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg;
use crate::phasespace::{aux, aux_momentum, momentum, Coeff, PhaseSpace, PhaseSpaceError, SymExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiracError {
    #[error("the dynamics needs a doubled phase space with named coordinates")]
    NotDoubled,
    #[error("{coords} coordinates but {f} component functions")]
    CountMismatch { coords: usize, f: usize },
    #[error("f[{index}] depends on `{symbol}`; component functions may only use coordinates and parameters")]
    ImpureDynamics { index: usize, symbol: String },
    #[error("charge {index} depends on momentum `{symbol}`; charges must be p-independent constants of motion")]
    ChargeDependsOnMomentum { index: usize, symbol: String },
    #[error("{charges} charges but {coeffs} coefficients")]
    ChargeCountMismatch { charges: usize, coeffs: usize },
    #[error("charge {index} is not conserved: {{C, H}} = {residual}")]
    ChargeNotConserved { index: usize, residual: String },
    #[error("charge {index} violates the auxiliary compatibility condition: residual {residual}")]
    IncompatibleCharge { index: usize, residual: String },
    #[error("the charge combination Σ a_i C_i is identically zero")]
    ZeroCombination,
    #[error("constraint bracket matrix is not constant or is singular (internal inconsistency)")]
    SingularBracketMatrix,
    #[error("consistency of the information-loss constraint fails; residual {0}")]
    SecondaryConstraint(String),
    #[error(transparent)]
    PhaseSpace(#[from] PhaseSpaceError),
}

/// Coefficient data of `L̄ = Σ q̄_a q̇_a − Σ q̄_a f_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedLagrangian {
    /// Coefficient of `q̇_a`, i.e. `q̄_a`.
    pub velocity_coeffs: Vec<SymExpr>,
    /// Velocity-independent part `−Σ q̄_a f_a`.
    pub potential: SymExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSystem {
    pub space: PhaseSpace,
    pub f: Vec<SymExpr>,
    /// `H = Σ p_a f_a`.
    pub h: SymExpr,
    pub lbar: ExtendedLagrangian,
    /// `H̄ = Σ q̄_a f_a`.
    pub hbar: SymExpr,
}

impl ExtendedSystem {
    pub fn coords(&self) -> &[String] {
        self.space.coords()
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// Bindings `p_a → q̄_a`, `p̄_a → 0` solving the second-class constraints.
    pub fn weak_bindings(&self) -> BTreeMap<String, SymExpr> {
        let mut out = BTreeMap::new();
        for c in self.coords() {
            out.insert(momentum(c), SymExpr::symbol(&aux(c)));
            out.insert(aux_momentum(c), SymExpr::zero());
        }
        out
    }

    /// Strong equality after imposing the second-class constraints.
    pub fn weakly_zero(&self, e: &SymExpr) -> Result<bool, PhaseSpaceError> {
        Ok(e.substitute(&self.weak_bindings())?.is_zero())
    }

    pub fn bracket(&self, a: &SymExpr, b: &SymExpr) -> Result<SymExpr, PhaseSpaceError> {
        self.space.poisson_bracket(a, b)
    }

    /// The 2N primary constraints in interleaved order `φ₁¹, φ₂¹, φ₁², …`.
    pub fn primary_constraints(&self) -> Result<ConstraintSet, DiracError> {
        let mut items = Vec::with_capacity(2 * self.dim());
        for c in self.coords() {
            items.push(Constraint {
                label: format!("phi1_{c}"),
                expr: &SymExpr::symbol(&momentum(c)) - &SymExpr::symbol(&aux(c)),
                class: ConstraintClass::SecondClass,
            });
            items.push(Constraint {
                label: format!("phi2_{c}"),
                expr: SymExpr::symbol(&aux_momentum(c)),
                class: ConstraintClass::SecondClass,
            });
        }
        ConstraintSet::new(&self.space, items)
    }
}

/// Assemble `H`, `L̄`, `H̄` for `q̇ = f(q)` on a doubled phase space.
pub fn build_extended_system(space: PhaseSpace, f: Vec<SymExpr>) -> Result<ExtendedSystem, DiracError> {
    let coords = space.coords().to_vec();
    if coords.is_empty() {
        return Err(DiracError::NotDoubled);
    }
    if coords.len() != f.len() {
        return Err(DiracError::CountMismatch { coords: coords.len(), f: f.len() });
    }
    for (index, fa) in f.iter().enumerate() {
        if let Some(symbol) = fa.symbols().into_iter().find(|s| !(coords.contains(s) || space.is_param(s))) {
            return Err(DiracError::ImpureDynamics { index, symbol });
        }
    }
    let mut h = SymExpr::zero();
    let mut hbar = SymExpr::zero();
    for (c, fa) in coords.iter().zip(&f) {
        h += &(&SymExpr::symbol(&momentum(c)) * fa);
        hbar += &(&SymExpr::symbol(&aux(c)) * fa);
    }
    let lbar = ExtendedLagrangian {
        velocity_coeffs: coords.iter().map(|c| SymExpr::symbol(&aux(c))).collect(),
        potential: -&hbar,
    };
    Ok(ExtendedSystem { space, f, h, lbar, hbar })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintClass {
    FirstClass,
    SecondClass,
    /// The information-loss constraint `φ₀`; only its combination with the
    /// primaries along the null vector is first class.
    InformationLoss,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub expr: SymExpr,
    pub class: ConstraintClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    /// `{φ_i, φ_j}`.
    pub matrix: Vec<Vec<SymExpr>>,
    pub null_vector: Option<Vec<SymExpr>>,
    pub first_class: Option<SymExpr>,
}

impl ConstraintSet {
    fn new(space: &PhaseSpace, constraints: Vec<Constraint>) -> Result<Self, DiracError> {
        let matrix = constraints
            .iter()
            .map(|a| constraints.iter().map(|b| space.poisson_bracket(&a.expr, &b.expr)).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        Ok(Self { constraints, matrix, null_vector: None, first_class: None })
    }

    pub fn exprs(&self) -> Vec<SymExpr> {
        self.constraints.iter().map(|c| c.expr.clone()).collect()
    }

    /// The second-class members (the 2N primaries).
    pub fn second_class(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(|c| c.class == ConstraintClass::SecondClass)
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.matrix.len();
        (0..n).all(|i| (0..n).all(|j| (&self.matrix[i][j] + &self.matrix[j][i]).is_zero()))
    }

    /// The bracket matrix as exact numbers, when no entry depends on symbols.
    pub fn constant_matrix(&self) -> Option<linalg::Matrix> {
        self.matrix.iter().map(|row| row.iter().map(SymExpr::as_constant).collect()).collect()
    }

    /// Row vector `e · M` (zero when `e` is a null vector).
    pub fn null_residual(&self) -> Option<Vec<SymExpr>> {
        let e = self.null_vector.as_ref()?;
        let n = self.matrix.len();
        Some(
            (0..n)
                .map(|j| {
                    let mut acc = SymExpr::zero();
                    for (i, ei) in e.iter().enumerate() {
                        acc += &(ei * &self.matrix[i][j]);
                    }
                    acc
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSolution {
    pub determinant: Coeff,
    /// `{φ_i, H̄}`.
    pub constraint_flow: Vec<SymExpr>,
    /// `u^j` with `{φ_i, H̄} + u^j {φ_i, φ_j} = 0`.
    pub multipliers: Vec<SymExpr>,
    /// True when `{φ₁ᵃ, H̄} = −∂H̄/∂q_a` and `{φ₂ᵃ, H̄} = −f_a` hold identically.
    pub flow_matches_closed_form: bool,
}

/// Solve the consistency conditions of the primary constraints for the
/// Lagrange multipliers, certifying that the bracket matrix has unit
/// determinant.
pub fn solve_multipliers(sys: &ExtendedSystem, cs: &ConstraintSet) -> Result<MultiplierSolution, DiracError> {
    let m = cs.constant_matrix().ok_or(DiracError::SingularBracketMatrix)?;
    let determinant = linalg::determinant(&m);
    let inv = linalg::inverse(&m).ok_or(DiracError::SingularBracketMatrix)?;
    let flow = cs
        .constraints
        .iter()
        .map(|c| sys.bracket(&c.expr, &sys.hbar))
        .collect::<Result<Vec<_>, _>>()?;
    // M u = −b with M constant; u = −M⁻¹ b
    let multipliers = inv
        .iter()
        .map(|row| {
            let mut acc = SymExpr::zero();
            for (k, bk) in flow.iter().enumerate() {
                if !row[k].is_zero() {
                    acc -= &bk.scale(&row[k]);
                }
            }
            acc
        })
        .collect();
    let mut closed = cs.constraints.len() == 2 * sys.dim();
    if closed {
        for (a, (c, fa)) in sys.coords().iter().zip(&sys.f).enumerate() {
            closed &= flow[2 * a] == -sys.hbar.differentiate(c);
            closed &= flow[2 * a + 1] == -fa;
        }
    }
    Ok(MultiplierSolution { determinant, constraint_flow: flow, multipliers, flow_matches_closed_form: closed })
}

/// Charges `C_i` with weights `a_i` (parameters or numbers).
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSpec {
    pub charges: Vec<SymExpr>,
    pub coeffs: Vec<SymExpr>,
}

impl ChargeSpec {
    pub fn new(charges: Vec<SymExpr>, coeffs: Vec<SymExpr>) -> Result<Self, DiracError> {
        if charges.len() != coeffs.len() {
            return Err(DiracError::ChargeCountMismatch { charges: charges.len(), coeffs: coeffs.len() });
        }
        Ok(Self { charges, coeffs })
    }

    /// `Σ a_i C_i`.
    pub fn combination(&self) -> SymExpr {
        let mut acc = SymExpr::zero();
        for (c, a) in self.charges.iter().zip(&self.coeffs) {
            acc += &(a * c);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeCheck {
    pub index: usize,
    /// `{C_i, H}`; zero for a constant of motion.
    pub bracket_with_h: SymExpr,
    /// `Σ_{a,k} ∂C/∂q̄_a · q̄_k ∂f_k/∂q_a`, present when `C` depends on `q̄`.
    pub compatibility: Option<SymExpr>,
}

impl ChargeCheck {
    pub fn passed(&self) -> bool {
        self.bracket_with_h.is_zero() && self.compatibility.as_ref().map_or(true, SymExpr::is_zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeReport {
    pub checks: Vec<ChargeCheck>,
}

impl ChargeReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(ChargeCheck::passed)
    }

    /// The first failure as an error.
    pub fn ensure(&self) -> Result<(), DiracError> {
        for c in &self.checks {
            if !c.bracket_with_h.is_zero() {
                return Err(DiracError::ChargeNotConserved { index: c.index, residual: c.bracket_with_h.to_string() });
            }
            if let Some(r) = c.compatibility.as_ref().filter(|r| !r.is_zero()) {
                return Err(DiracError::IncompatibleCharge { index: c.index, residual: r.to_string() });
            }
        }
        Ok(())
    }
}

fn momentum_symbols(sys: &ExtendedSystem) -> Vec<String> {
    sys.coords().iter().flat_map(|c| [momentum(c), aux_momentum(c)]).collect()
}

/// Reject charges that depend on any momentum.
pub fn check_p_independence(sys: &ExtendedSystem, spec: &ChargeSpec) -> Result<(), DiracError> {
    let moms = momentum_symbols(sys);
    for (index, c) in spec.charges.iter().enumerate() {
        if let Some(symbol) = moms.iter().find(|m| c.depends_on(m)) {
            return Err(DiracError::ChargeDependsOnMomentum { index, symbol: symbol.clone() });
        }
    }
    Ok(())
}

/// Conservation `{C_i, H} = 0` plus, for `q̄`-dependent charges, the
/// compatibility condition that keeps the information-loss constraint free
/// of secondary constraints.
pub fn verify_charges(sys: &ExtendedSystem, spec: &ChargeSpec) -> Result<ChargeReport, DiracError> {
    check_p_independence(sys, spec)?;
    let coords = sys.coords();
    let mut checks = Vec::new();
    for (index, c) in spec.charges.iter().enumerate() {
        let bracket_with_h = sys.bracket(c, &sys.h)?;
        let qbar_dependent = coords.iter().any(|q| c.depends_on(&aux(q)));
        let compatibility = if qbar_dependent {
            let mut acc = SymExpr::zero();
            for qa in coords {
                let dc = c.differentiate(&aux(qa));
                if dc.is_zero() {
                    continue;
                }
                for (qk, fk) in coords.iter().zip(&sys.f) {
                    let dfk = fk.differentiate(qa);
                    if !dfk.is_zero() {
                        acc += &(&(&dc * &SymExpr::symbol(&aux(qk))) * &dfk);
                    }
                }
            }
            Some(acc)
        } else {
            None
        };
        checks.push(ChargeCheck { index, bracket_with_h, compatibility });
    }
    Ok(ChargeReport { checks })
}

/// A rational function kept as an explicit quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct Fraction {
    pub numerator: SymExpr,
    pub denominator: SymExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HSplit {
    /// `(H + S)² / 4S`.
    pub plus: Fraction,
    /// `(H − S)² / 4S`.
    pub minus: Fraction,
    /// `num₊ − num₋ − H·4S`; zero certifies `H₊ − H₋ = H`.
    pub difference_residual: SymExpr,
    /// `num₋ − (H − S)²`; zero certifies that `H₋ = 0` forces `H = S`.
    pub minus_square_residual: SymExpr,
}

/// Split `H = H₊ − H₋` with `H₊ = (H + S)²/4S`, `H₋ = (H − S)²/4S`, `S = Σ a_i C_i`.
pub fn build_h_split(sys: &ExtendedSystem, spec: &ChargeSpec) -> Result<HSplit, DiracError> {
    let s = spec.combination();
    if s.is_zero() {
        return Err(DiracError::ZeroCombination);
    }
    let den = s.scale(&Coeff::from_int(4));
    let plus_num = (&sys.h + &s).pow(2);
    let minus_num = (&sys.h - &s).pow(2);
    let difference_residual = &(&plus_num - &minus_num) - &(&sys.h * &den);
    let minus_square_residual = &minus_num - &(&sys.h - &s).pow(2);
    Ok(HSplit {
        plus: Fraction { numerator: plus_num, denominator: den.clone() },
        minus: Fraction { numerator: minus_num, denominator: den },
        difference_residual,
        minus_square_residual,
    })
}

/// Certificates produced alongside the first-class constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationLoss {
    pub set: ConstraintSet,
    pub phi0: SymExpr,
    /// The first-class constraint `φ = Σ e_i φ_i`.
    pub phi: SymExpr,
    /// `Σ e_i {φ_i, H̄}`.
    pub consistency_residual: SymExpr,
    /// `{φ, φ_i}` for every constraint after imposing the second-class solution.
    pub weak_brackets: Vec<SymExpr>,
    /// `φ − (H − Σ a_i C_i)` after imposing the second-class solution.
    pub weak_identity_residual: SymExpr,
    /// Determinant of the primary (second-class) block.
    pub primary_determinant: Coeff,
}

impl InformationLoss {
    pub fn null_vector(&self) -> &[SymExpr] {
        self.set.null_vector.as_deref().unwrap_or(&[])
    }

    pub fn all_certified(&self) -> bool {
        self.consistency_residual.is_zero()
            && self.weak_brackets.iter().all(SymExpr::is_zero)
            && self.weak_identity_residual.is_zero()
            && self.primary_determinant.is_one()
            && self.set.null_residual().is_some_and(|r| r.iter().all(SymExpr::is_zero))
    }
}

/// Prepend `φ₀ = H̄ − Σ a_i C_i`, find the null vector of the enlarged
/// bracket matrix and assemble the first-class constraint.
pub fn information_loss_constraint(sys: &ExtendedSystem, spec: &ChargeSpec) -> Result<InformationLoss, DiracError> {
    check_p_independence(sys, spec)?;
    let s = spec.combination();
    let phi0 = &sys.hbar - &s;
    let primary = sys.primary_constraints()?;
    let primary_matrix = primary.constant_matrix().ok_or(DiracError::SingularBracketMatrix)?;
    let primary_determinant = linalg::determinant(&primary_matrix);

    let mut items = vec![Constraint {
        label: "phi0".to_string(),
        expr: phi0.clone(),
        class: ConstraintClass::InformationLoss,
    }];
    items.extend(primary.constraints.iter().cloned());
    let mut set = ConstraintSet::new(&sys.space, items)?;

    // e = (1, ∂φ₀/∂q̄_a, −∂φ₀/∂q_a) per coordinate; {φ₀, p̄_a} = ∂φ₀/∂q̄_a
    let mut e = vec![SymExpr::one()];
    for c in sys.coords() {
        e.push(phi0.differentiate(&aux(c)));
        e.push(-phi0.differentiate(c));
    }
    let mut phi = SymExpr::zero();
    let mut consistency = SymExpr::zero();
    for (ei, ci) in e.iter().zip(&set.constraints) {
        phi += &(ei * &ci.expr);
        consistency += &(ei * &sys.bracket(&ci.expr, &sys.hbar)?);
    }
    let bindings = sys.weak_bindings();
    let weak_brackets = set
        .constraints
        .iter()
        .map(|c| sys.bracket(&phi, &c.expr)?.substitute(&bindings))
        .collect::<Result<Vec<_>, _>>()?;
    let weak_identity_residual = (&phi - &(&sys.h - &s)).substitute(&bindings)?;
    set.null_vector = Some(e);
    set.first_class = Some(phi.clone());

    if !consistency.is_zero() {
        return Err(DiracError::SecondaryConstraint(consistency.to_string()));
    }
    Ok(InformationLoss {
        set,
        phi0,
        phi,
        consistency_residual: consistency,
        weak_brackets,
        weak_identity_residual,
        primary_determinant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pendulum(params: &[&str]) -> ExtendedSystem {
        let space = PhaseSpace::doubled(&["x", "y"], params).unwrap();
        let f = vec![space.parse("-y").unwrap(), space.parse("x").unwrap()];
        build_extended_system(space, f).unwrap()
    }

    #[test]
    fn pendulum_hamiltonians() {
        let sys = pendulum(&["a1"]);
        assert_eq!(sys.h, sys.space.parse("x*p_y - y*p_x").unwrap());
        assert_eq!(sys.hbar, sys.space.parse("x*qb_y - y*qb_x").unwrap());
        assert_eq!(sys.h.substitute(&sys.weak_bindings()).unwrap(), sys.hbar);
    }

    #[test]
    fn static_system() {
        let space = PhaseSpace::doubled(&["q"], &[] as &[&str]).unwrap();
        let sys = build_extended_system(space, vec![SymExpr::zero()]).unwrap();
        assert!(sys.h.is_zero());
        assert_eq!(sys.lbar.velocity_coeffs, vec![SymExpr::symbol("qb_q")]);
        let cs = sys.primary_constraints().unwrap();
        let sol = solve_multipliers(&sys, &cs).unwrap();
        assert!(sol.determinant.is_one());
        assert!(sol.constraint_flow.iter().all(SymExpr::is_zero));
        assert!(sol.multipliers.iter().all(SymExpr::is_zero));
    }

    #[test]
    fn impure_dynamics_rejected() {
        let space = PhaseSpace::doubled(&["x"], &[] as &[&str]).unwrap();
        let f = vec![space.parse("p_x").unwrap()];
        assert!(matches!(build_extended_system(space, f), Err(DiracError::ImpureDynamics { index: 0, .. })));
        let space = PhaseSpace::doubled(&["x", "y"], &[] as &[&str]).unwrap();
        assert!(matches!(
            build_extended_system(space, vec![SymExpr::zero()]),
            Err(DiracError::CountMismatch { coords: 2, f: 1 })
        ));
    }

    #[test]
    fn pendulum_multipliers() {
        let sys = pendulum(&[]);
        let cs = sys.primary_constraints().unwrap();
        assert!(cs.is_antisymmetric());
        let sol = solve_multipliers(&sys, &cs).unwrap();
        assert!(sol.determinant.is_one());
        assert!(sol.flow_matches_closed_form);
        // consistency: flow_i + Σ_j u_j M_ij = 0
        for (i, row) in cs.matrix.iter().enumerate() {
            let mut acc = sol.constraint_flow[i].clone();
            for (mij, uj) in row.iter().zip(&sol.multipliers) {
                acc += &(mij * uj);
            }
            assert!(acc.is_zero(), "row {i}: {acc}");
        }
    }

    #[test]
    fn pendulum_first_class_constraint() {
        let sys = pendulum(&["a1"]);
        let s = &sys.space;
        let spec = ChargeSpec::new(vec![s.parse("x^2 + y^2").unwrap()], vec![s.parse("a1").unwrap()]).unwrap();
        assert!(verify_charges(&sys, &spec).unwrap().passed());
        let il = information_loss_constraint(&sys, &spec).unwrap();
        let expected = s
            .parse("x*p_y - y*p_x - a1*x^2 - a1*y^2 - pb_x*qb_y + 2*a1*pb_x*x + pb_y*qb_x + 2*a1*pb_y*y")
            .unwrap();
        assert_eq!(il.phi, expected);
        assert!(il.all_certified());
    }

    #[test]
    fn non_conserved_and_p_dependent_charges() {
        let sys = pendulum(&["a1"]);
        let s = &sys.space;
        let spec = ChargeSpec::new(vec![s.parse("x^2").unwrap()], vec![SymExpr::one()]).unwrap();
        let report = verify_charges(&sys, &spec).unwrap();
        assert!(!report.passed());
        assert!(matches!(report.ensure(), Err(DiracError::ChargeNotConserved { index: 0, .. })));
        let spec = ChargeSpec::new(vec![s.parse("x*p_x + y*p_y").unwrap()], vec![SymExpr::one()]).unwrap();
        assert!(matches!(verify_charges(&sys, &spec), Err(DiracError::ChargeDependsOnMomentum { .. })));
    }

    #[test]
    fn h_split_identities() {
        let sys = pendulum(&["a1"]);
        let s = &sys.space;
        let spec = ChargeSpec::new(vec![s.parse("x^2 + y^2").unwrap()], vec![s.parse("a1").unwrap()]).unwrap();
        let split = build_h_split(&sys, &spec).unwrap();
        assert!(split.difference_residual.is_zero());
        assert!(split.minus_square_residual.is_zero());
        assert_eq!(split.plus.denominator, s.parse("4*a1*x^2 + 4*a1*y^2").unwrap());
        // H = S pointwise makes the H₋ numerator vanish
        // y = 0, p_y = a1*x puts the system on H = S, where H₋ vanishes
        let on_shell = PhaseSpace::bindings([("y", SymExpr::zero()), ("p_y", s.parse("a1*x").unwrap())]);
        assert!(split.minus.numerator.substitute(&on_shell).unwrap().is_zero());
        assert!(!split.plus.numerator.substitute(&on_shell).unwrap().is_zero());
        let zero = ChargeSpec::new(vec![s.parse("x").unwrap()], vec![SymExpr::zero()]).unwrap();
        assert!(matches!(build_h_split(&sys, &zero), Err(DiracError::ZeroCombination)));
    }
}
