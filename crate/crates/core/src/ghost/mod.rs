//! Time-lattice checks of the ghost-extended (Gozzi) action.
//!
//! A [`LatticeFunctional`] is a discretized action 𝒜 over lattice variables
//! named `family@k` (slice `k`), together with its exact gradient and
//! Hessian with respect to the dynamical variables. Given field values, a
//! [`LatticeAction`] assembles
//!
//! ```text
//! S = Σᵢ λᵢ ∂ᵢ𝒜 − i Σᵢⱼ c̄ᵢ ∂ᵢ∂ⱼ𝒜 cⱼ
//! ```
//!
//! in a [`GrassmannElement`] algebra whose generators are laid out as
//! `ε̄ = g0`, `θ̄ = g1`, `θ = g2`, then `c₀…c_{m−1}`, then `c̄₀…c̄_{m−1}`.
//! The lattice spacing absorbs the `Δt` factors of the continuum sums: a
//! lattice gradient already equals `Δt · δ𝒜/δq(t)`.
//!
//! Endpoints are either held fixed ([`Boundary::Fixed`], the convention for
//! the BRST checks) or varied along with the interior ([`Boundary::Free`],
//! used for the Euler-functional check, which needs every slice).

mod grassmann;
mod structure;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use grassmann::{c_i, c_int, c_real, CRational, GrassmannElement, MAX_GENERATORS};
pub use structure::{alpha_structure_check, doubled_kinetic_form, euler_functional_check, AlphaReport};

use crate::phasespace::{aux, Coeff, PhaseSpaceError, SymExpr};

#[derive(Debug, Error)]
pub enum GhostError {
    #[error("elements of different algebras ({0} vs {1} generators)")]
    MismatchedAlgebra(u32, u32),
    #[error("grid of {0} slices is too small (need at least 3)")]
    GridTooSmall(usize),
    #[error("{needed} generators needed but the algebra holds at most {max}")]
    TooManyGenerators { needed: usize, max: u32 },
    #[error("{coords} coordinates but {f} velocity components")]
    CountMismatch { coords: usize, f: usize },
    #[error("no value for lattice symbol `{0}`")]
    MissingValue(String),
    #[error("expected {expected} multiplier values, got {found}")]
    MultiplierCount { expected: usize, found: usize },
    #[error("α has {found} entries for {expected} field families")]
    AlphaLength { expected: usize, found: usize },
    #[error("kinetic form must be square")]
    NotSquare,
    #[error("kinetic form must be upper triangular (entry ({0}, {1}) is nonzero)")]
    NotUpperTriangular(usize, usize),
    #[error("odd number of degrees of freedom ({0}): an idempotent α needs rank N/2")]
    OddDimension(usize),
    #[error("no idempotent α satisfies the kinetic-structure equations")]
    NoIdempotentSolution,
    #[error(transparent)]
    Expr(#[from] PhaseSpaceError),
}

/// Generator index of the BRST parameter ε̄.
pub const EPSILON_BAR: u32 = 0;
/// Generator index of the superspace coordinate θ̄.
pub const THETA_BAR: u32 = 1;
/// Generator index of the superspace coordinate θ.
pub const THETA: u32 = 2;
const RESERVED: usize = 3;

/// Uniform time grid with `slices` points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub slices: usize,
    pub dt: BigRational,
}

impl Grid {
    pub fn new(slices: usize, dt: BigRational) -> Result<Self, GhostError> {
        if slices < 3 {
            return Err(GhostError::GridTooSmall(slices));
        }
        Ok(Self { slices, dt })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// First and last slices are held at given values and carry no ghosts.
    Fixed,
    /// Every slice is a dynamical variable.
    Free,
}

/// Name of the lattice variable for `family` at slice `k`.
pub fn lattice_symbol(family: &str, k: usize) -> String {
    format!("{family}@{k}")
}

/// A discretized action with its exact first and second derivatives.
#[derive(Clone, Debug)]
pub struct LatticeFunctional {
    pub grid: Grid,
    pub boundary: Boundary,
    pub families: Vec<String>,
    pub params: Vec<String>,
    pub action: SymExpr,
    /// Dynamical variables, slice-major.
    pub variables: Vec<String>,
    /// Index into `families` for each variable.
    pub family_of: Vec<usize>,
    pub gradient: Vec<SymExpr>,
    pub hessian: Vec<Vec<SymExpr>>,
}

impl LatticeFunctional {
    /// The doubled first-order action
    /// `𝒜 = Σₖ Σₐ [q̄ₐ,ₖ (qₐ,ₖ₊₁ − qₐ,ₖ) − Δt q̄ₐ,ₖ fₐ(qₖ)]`, `k = 0 … n−2`,
    /// with families `q₁…q_N, q̄₁…q̄_N`.
    pub fn thooft<S: AsRef<str>>(
        coords: &[S],
        f: &[SymExpr],
        params: &[S],
        grid: Grid,
        boundary: Boundary,
    ) -> Result<Self, GhostError> {
        if coords.len() != f.len() {
            return Err(GhostError::CountMismatch { coords: coords.len(), f: f.len() });
        }
        let dt = SymExpr::constant(Coeff::from_rational(grid.dt.clone()));
        let mut action = SymExpr::zero();
        for k in 0..grid.slices - 1 {
            let at_k: BTreeMap<String, SymExpr> = coords
                .iter()
                .map(|c| (c.as_ref().to_string(), SymExpr::symbol(&lattice_symbol(c.as_ref(), k))))
                .collect();
            for (c, fa) in coords.iter().zip(f) {
                let c = c.as_ref();
                let qbar = SymExpr::symbol(&lattice_symbol(&aux(c), k));
                let step = &SymExpr::symbol(&lattice_symbol(c, k + 1)) - &SymExpr::symbol(&lattice_symbol(c, k));
                let drift = &dt * &fa.substitute(&at_k)?;
                action += &(&qbar * &(&step - &drift));
            }
        }
        let families = coords
            .iter()
            .map(|c| c.as_ref().to_string())
            .chain(coords.iter().map(|c| aux(c.as_ref())))
            .collect();
        Self::from_action(grid, families, action, params, boundary)
    }

    /// Wrap an arbitrary polynomial action over `family@k` symbols.
    pub fn from_action<S: AsRef<str>>(
        grid: Grid,
        families: Vec<String>,
        action: SymExpr,
        params: &[S],
        boundary: Boundary,
    ) -> Result<Self, GhostError> {
        let slices = match boundary {
            Boundary::Fixed => 1..grid.slices - 1,
            Boundary::Free => 0..grid.slices,
        };
        let mut variables = Vec::new();
        let mut family_of = Vec::new();
        for k in slices {
            for (i, fam) in families.iter().enumerate() {
                variables.push(lattice_symbol(fam, k));
                family_of.push(i);
            }
        }
        let needed = RESERVED + 2 * variables.len();
        if needed > MAX_GENERATORS as usize {
            return Err(GhostError::TooManyGenerators { needed, max: MAX_GENERATORS });
        }
        let gradient: Vec<SymExpr> = variables.iter().map(|v| action.differentiate(v)).collect();
        let hessian = gradient.iter().map(|g| variables.iter().map(|v| g.differentiate(v)).collect()).collect();
        Ok(Self {
            grid,
            boundary,
            families,
            params: params.iter().map(|p| p.as_ref().to_string()).collect(),
            action,
            variables,
            family_of,
            gradient,
            hessian,
        })
    }

    /// Symbols of the action that are neither dynamical nor parameters
    /// (the held endpoints).
    pub fn fixed_symbols(&self) -> Vec<String> {
        self.action
            .symbols()
            .into_iter()
            .filter(|s| !self.variables.contains(s) && !self.params.contains(s))
            .collect()
    }

    /// Number of ghost generators (`c` and `c̄` for every dynamical variable).
    pub fn ghost_generators(&self) -> usize {
        2 * self.variables.len()
    }

    /// Size of the exterior algebra used by [`LatticeAction`].
    pub fn algebra_size(&self) -> u32 {
        (RESERVED + self.ghost_generators()) as u32
    }

    pub fn ghost(&self, i: usize) -> u32 {
        (RESERVED + i) as u32
    }

    pub fn antighost(&self, i: usize) -> u32 {
        (RESERVED + self.variables.len() + i) as u32
    }
}

/// Exact real values for every symbol of a functional, plus the
/// multiplier field λ (one entry per dynamical variable).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfig {
    pub values: BTreeMap<String, BigRational>,
    pub lambda: Vec<BigRational>,
}

fn random_rational(rng: &mut impl Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=7)))
}

impl FieldConfig {
    /// Random small rationals for all variables, endpoints, parameters
    /// (parameters are kept nonzero) and multipliers.
    pub fn random(functional: &LatticeFunctional, rng: &mut impl Rng) -> Self {
        let mut values = BTreeMap::new();
        for s in functional.variables.iter().chain(&functional.fixed_symbols()) {
            values.insert(s.clone(), random_rational(rng));
        }
        for p in &functional.params {
            let mut v = random_rational(rng);
            while v.is_zero() {
                v = random_rational(rng);
            }
            values.insert(p.clone(), v);
        }
        let lambda = functional.variables.iter().map(|_| random_rational(rng)).collect();
        Self { values, lambda }
    }

    /// All fields zero (parameters set to one).
    pub fn zero(functional: &LatticeFunctional) -> Self {
        let mut values: BTreeMap<String, BigRational> = functional
            .variables
            .iter()
            .chain(&functional.fixed_symbols())
            .map(|s| (s.clone(), BigRational::zero()))
            .collect();
        for p in &functional.params {
            values.insert(p.clone(), BigRational::from_integer(1.into()));
        }
        Self { values, lambda: vec![BigRational::zero(); functional.variables.len()] }
    }
}

/// Terms added to `S` on purpose to break the symmetry (negative controls).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Breaking {
    /// `Δt Σ λᵢ²` — BRST-invariant, since λ does not transform.
    LambdaSquared,
    /// `Δt Σ λᵢ² qᵢ` — varies by `Δt Σ λᵢ² ε̄cᵢ`.
    LambdaSquaredField,
}

/// The ghost-extended action at one field configuration.
#[derive(Clone, Debug)]
pub struct LatticeAction<'a> {
    pub functional: &'a LatticeFunctional,
    pub config: FieldConfig,
    pub breaking: Option<Breaking>,
    /// `S` with ghosts left as free generators.
    pub s: GrassmannElement,
}

/// Assemble the lattice action `S` for a functional at a configuration.
pub fn discretize_action(functional: &LatticeFunctional, config: FieldConfig) -> Result<LatticeAction<'_>, GhostError> {
    LatticeAction::new(functional, config, None)
}

impl<'a> LatticeAction<'a> {
    pub fn new(
        functional: &'a LatticeFunctional,
        config: FieldConfig,
        breaking: Option<Breaking>,
    ) -> Result<Self, GhostError> {
        if config.lambda.len() != functional.variables.len() {
            return Err(GhostError::MultiplierCount { expected: functional.variables.len(), found: config.lambda.len() });
        }
        let mut action = Self { functional, config, breaking, s: GrassmannElement::zero(functional.algebra_size()) };
        let fields = action.plain_fields();
        let antighosts = action.antighosts();
        let lambda = action.lambda_elements(false);
        action.s = action.assemble(&fields, &antighosts, &lambda)?;
        Ok(action)
    }

    fn n(&self) -> u32 {
        self.functional.algebra_size()
    }

    fn scalar(&self, r: &BigRational) -> GrassmannElement {
        GrassmannElement::scalar(self.n(), c_real(r.clone()))
    }

    fn value(&self, sym: &str) -> Result<&BigRational, GhostError> {
        self.config.values.get(sym).ok_or_else(|| GhostError::MissingValue(sym.to_string()))
    }

    fn plain_fields(&self) -> Vec<GrassmannElement> {
        self.functional.variables.iter().map(|v| self.scalar(&self.config.values[v])).collect()
    }

    fn ghosts(&self) -> Vec<GrassmannElement> {
        (0..self.functional.variables.len()).map(|i| GrassmannElement::generator(self.n(), self.functional.ghost(i))).collect()
    }

    fn antighosts(&self) -> Vec<GrassmannElement> {
        (0..self.functional.variables.len())
            .map(|i| GrassmannElement::generator(self.n(), self.functional.antighost(i)))
            .collect()
    }

    fn lambda_elements(&self, mirrored: bool) -> Vec<GrassmannElement> {
        self.config.lambda.iter().map(|l| self.scalar(&if mirrored { -l.clone() } else { l.clone() })).collect()
    }

    /// Evaluate an expression with dynamical variables replaced by
    /// (possibly Grassmann-valued) `fields`.
    fn eval(&self, expr: &SymExpr, fields: &[GrassmannElement]) -> Result<GrassmannElement, GhostError> {
        for s in expr.symbols() {
            if !self.functional.variables.contains(&s) {
                self.value(&s)?;
            }
        }
        let index: BTreeMap<&str, usize> =
            self.functional.variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let out = expr.eval_in(|s| match index.get(s) {
            Some(&i) => Some(fields[i].clone()),
            None => self.config.values.get(s).map(|r| self.scalar(r)),
        })?;
        Ok(&out + &GrassmannElement::zero(self.n()))
    }

    /// `Σ λᵢ ∂ᵢ𝒜(Q) − i Σ c̄ᵢ ∂ᵢ∂ⱼ𝒜(Q) cⱼ` plus any breaking term.
    fn assemble(
        &self,
        fields: &[GrassmannElement],
        antighosts: &[GrassmannElement],
        lambda: &[GrassmannElement],
    ) -> Result<GrassmannElement, GhostError> {
        let f = self.functional;
        let ghosts = self.ghosts();
        let minus_i = GrassmannElement::scalar(self.n(), -c_i());
        let mut s = GrassmannElement::zero(self.n());
        for (i, grad) in f.gradient.iter().enumerate() {
            s = &s + &(&lambda[i] * &self.eval(grad, fields)?);
            for (j, h) in f.hessian[i].iter().enumerate() {
                if h.is_zero() {
                    continue;
                }
                let term = &(&antighosts[i] * &self.eval(h, fields)?) * &ghosts[j];
                s = &s + &(&minus_i * &term);
            }
        }
        if let Some(breaking) = self.breaking {
            let dt = self.scalar(&f.grid.dt);
            for (i, l) in lambda.iter().enumerate() {
                let mut t = &(&dt * l) * l;
                if breaking == Breaking::LambdaSquaredField {
                    t = &t * &fields[i];
                }
                s = &s + &t;
            }
        }
        Ok(s)
    }

    /// First-order variation of `S` under `δq = ε̄c`, `δc = 0`,
    /// `δc̄ = −iε̄λ`, `δλ = 0`. Exact: ε̄² = 0 truncates the expansion.
    pub fn brst_check(&self) -> Result<GrassmannElement, GhostError> {
        let eps = GrassmannElement::generator(self.n(), EPSILON_BAR);
        let ghosts = self.ghosts();
        let shifted: Vec<GrassmannElement> =
            self.plain_fields().iter().zip(&ghosts).map(|(q, c)| q + &(&eps * c)).collect();
        let minus_i_eps = eps.scale(&-c_i());
        let lambda = self.lambda_elements(false);
        let shifted_bar: Vec<GrassmannElement> =
            self.antighosts().iter().zip(&lambda).map(|(cb, l)| cb + &(&minus_i_eps * l)).collect();
        let varied = self.assemble(&shifted, &shifted_bar, &lambda)?;
        Ok(&varied - &self.s)
    }

    /// Berezin integral `∫dθ̄dθ 𝒜[Φ]` of the action evaluated on the
    /// superfield `Φ = q + iθc − iθ̄c̄ + iθ̄θλ`, compared with `−iS`.
    pub fn superfield_check(&self) -> Result<SuperfieldReport, GhostError> {
        let n = self.n();
        let i = GrassmannElement::scalar(n, c_i());
        let theta = GrassmannElement::generator(n, THETA);
        let theta_bar = GrassmannElement::generator(n, THETA_BAR);
        let tb_t = &theta_bar * &theta;
        let lambda = self.lambda_elements(false);
        let superfield: Vec<GrassmannElement> = self
            .plain_fields()
            .iter()
            .zip(self.ghosts().iter().zip(self.antighosts().iter().zip(&lambda)))
            .map(|(q, (c, (cb, l)))| {
                let up = &i * &(&theta * c);
                let down = &i * &(&theta_bar * cb);
                let top = &i * &(&tb_t * l);
                &(&(q + &up) - &down) + &top
            })
            .collect();
        let integral = self.eval(&self.functional.action, &superfield)?.berezin(THETA_BAR, THETA);
        let minus_i = GrassmannElement::scalar(n, -c_i());
        let minus_i_s = &minus_i * &self.s;
        let mirrored = self.assemble(&self.plain_fields(), &self.antighosts(), &self.lambda_elements(true))?;
        Ok(SuperfieldReport {
            literal_residual: &integral - &minus_i_s,
            residual: &integral - &(&minus_i * &mirrored),
            integral,
        })
    }
}

/// Outcome of the superfield identity.
///
/// With `Φ = q + iθc − iθ̄c̄ + iθ̄θλ` and `∫dθ̄dθ θ̄θ = 1` the integral is
/// `iλ·∇𝒜 − c̄Hc`, i.e. `−iS` with the multiplier field reflected
/// (`λ → −λ`, a relabelling of an integration variable). `residual` is the
/// difference from that reflected `−iS` and vanishes exactly;
/// `literal_residual` compares with `−iS` itself and equals `2iλ·∇𝒜`.
#[derive(Clone, Debug)]
pub struct SuperfieldReport {
    pub integral: GrassmannElement,
    pub residual: GrassmannElement,
    pub literal_residual: GrassmannElement,
}

/// One field configuration of a randomized sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepCase {
    pub slices: usize,
    pub trial: usize,
    pub ghost_generators: usize,
    pub brst_terms: usize,
    pub superfield_terms: usize,
}

impl SweepCase {
    pub fn passed(&self) -> bool {
        self.brst_terms == 0 && self.superfield_terms == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub cases: Vec<SweepCase>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(SweepCase::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCase> {
        self.cases.iter().filter(|c| !c.passed())
    }
}

/// Deterministic generator for trial `trial` of a sweep on `slices` slices.
fn trial_rng(seed: u64, slices: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((slices as u64) << 32) | trial as u64);
    rng
}

/// BRST and superfield checks on the doubled action of `q̇ = f(q)` for
/// every grid size in `slices`, `trials` random configurations each.
pub fn random_sweep<S: AsRef<str> + Sync>(
    coords: &[S],
    f: &[SymExpr],
    params: &[S],
    slices: RangeInclusive<usize>,
    trials: usize,
    seed: u64,
) -> Result<SweepReport, GhostError> {
    let dt = BigRational::new(1.into(), 10.into());
    let functionals = slices
        .map(|n| LatticeFunctional::thooft(coords, f, params, Grid::new(n, dt.clone())?, Boundary::Fixed))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(&LatticeFunctional, usize)> =
        functionals.iter().flat_map(|lf| (0..trials).map(move |t| (lf, t))).collect();
    let cases = jobs
        .into_par_iter()
        .map(|(lf, trial)| {
            let mut rng = trial_rng(seed, lf.grid.slices, trial);
            let action = discretize_action(lf, FieldConfig::random(lf, &mut rng))?;
            Ok(SweepCase {
                slices: lf.grid.slices,
                trial,
                ghost_generators: lf.ghost_generators(),
                brst_terms: action.brst_check()?.len(),
                superfield_terms: action.superfield_check()?.residual.len(),
            })
        })
        .collect::<Result<Vec<_>, GhostError>>()?;
    Ok(SweepReport { cases })
}

/// BRST variation of the action with the `Δt Σ λ² q` breaking term at one
/// random configuration; nonzero for any non-degenerate configuration.
pub fn broken_control<S: AsRef<str>>(
    coords: &[S],
    f: &[SymExpr],
    params: &[S],
    slices: usize,
    seed: u64,
) -> Result<GrassmannElement, GhostError> {
    let lf = LatticeFunctional::thooft(coords, f, params, Grid::new(slices, BigRational::new(1.into(), 10.into()))?, Boundary::Fixed)?;
    let mut rng = trial_rng(seed, slices, usize::MAX >> 32);
    let config = FieldConfig::random(&lf, &mut rng);
    LatticeAction::new(&lf, config, Some(Breaking::LambdaSquaredField))?.brst_check()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::PhaseSpace;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn grid(n: usize) -> Grid {
        Grid::new(n, rat(1, 10)).unwrap()
    }

    fn one_dim(f: &str) -> LatticeFunctional {
        let space = PhaseSpace::doubled(&["q"], &[]).unwrap();
        LatticeFunctional::thooft(&["q"], &[space.parse(f).unwrap()], &[], grid(3), Boundary::Fixed).unwrap()
    }

    #[test]
    fn grid_must_hold_a_stencil() {
        assert!(matches!(Grid::new(2, rat(1, 10)), Err(GhostError::GridTooSmall(2))));
    }

    #[test]
    fn three_slice_action_matches_hand_assembly() {
        // f = q²: with only slice 1 dynamical the variables are (q@1, qb_q@1).
        let lf = one_dim("q^2");
        assert_eq!(lf.variables, ["q@1", "qb_q@1"]);
        let values: BTreeMap<String, BigRational> = [
            ("q@0", rat(1, 2)),
            ("q@1", rat(-3, 1)),
            ("q@2", rat(2, 3)),
            ("qb_q@0", rat(5, 1)),
            ("qb_q@1", rat(-1, 4)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let lambda = vec![rat(7, 1), rat(-2, 1)];
        let action = discretize_action(&lf, FieldConfig { values: values.clone(), lambda: lambda.clone() }).unwrap();

        // ∂𝒜/∂q₁ = q̄₀ − q̄₁ − 2Δt q̄₁q₁ ; ∂𝒜/∂q̄₁ = q₂ − q₁ − Δt q₁²
        // H = [[−2Δt q̄₁, −1 − 2Δt q₁], [−1 − 2Δt q₁, 0]]
        let dt = rat(1, 10);
        let (q0b, q1, q2, q1b) = (values["qb_q@0"].clone(), values["q@1"].clone(), values["q@2"].clone(), values["qb_q@1"].clone());
        let two = rat(2, 1);
        let g0 = &q0b - &q1b - &two * &dt * &q1b * &q1;
        let g1 = &q2 - &q1 - &dt * &q1 * &q1;
        let h00 = -(&two * &dt * &q1b);
        let h01 = rat(-1, 1) - &two * &dt * &q1;
        let n = lf.algebra_size();
        let gen = |i| GrassmannElement::generator(n, i);
        let (c0, c1, b0, b1) = (gen(lf.ghost(0)), gen(lf.ghost(1)), gen(lf.antighost(0)), gen(lf.antighost(1)));
        let sc = |r: BigRational| GrassmannElement::scalar(n, c_real(r));
        let mut expected = sc(&lambda[0] * &g0 + &lambda[1] * &g1);
        let minus_i = GrassmannElement::scalar(n, -c_i());
        expected = &expected + &(&minus_i * &(&(&b0 * &sc(h00)) * &c0));
        expected = &expected + &(&minus_i * &(&(&b0 * &sc(h01.clone())) * &c1));
        expected = &expected + &(&minus_i * &(&(&b1 * &sc(h01)) * &c0));
        assert_eq!(action.s, expected);
    }

    #[test]
    fn free_flow_ghost_block_is_forward_difference() {
        let space = PhaseSpace::doubled(&["q"], &[]).unwrap();
        let lf = LatticeFunctional::thooft(&["q"], &[space.parse("0").unwrap()], &[], grid(5), Boundary::Fixed).unwrap();
        for (i, vi) in lf.variables.iter().enumerate() {
            for (j, vj) in lf.variables.iter().enumerate() {
                let h = lf.hessian[i][j].as_constant().unwrap();
                let expected = match (vi.strip_prefix("qb_q@"), vj.strip_prefix("q@")) {
                    (Some(k), Some(l)) => {
                        let (k, l): (i64, i64) = (k.parse().unwrap(), l.parse().unwrap());
                        i64::from(l == k + 1) - i64::from(l == k)
                    }
                    _ => match (vi.strip_prefix("q@"), vj.strip_prefix("qb_q@")) {
                        (Some(l), Some(k)) => {
                            let (k, l): (i64, i64) = (k.parse().unwrap(), l.parse().unwrap());
                            i64::from(l == k + 1) - i64::from(l == k)
                        }
                        _ => 0,
                    },
                };
                assert_eq!(h, Coeff::from_int(expected), "H[{vi}][{vj}]");
            }
        }
    }

    #[test]
    fn pendulum_four_slices_has_sixteen_ghosts() {
        let space = PhaseSpace::doubled(&["x", "y"], &[]).unwrap();
        let f = vec![space.parse("-y").unwrap(), space.parse("x").unwrap()];
        let lf = LatticeFunctional::thooft(&["x", "y"], &f, &[], grid(4), Boundary::Fixed).unwrap();
        assert_eq!(lf.ghost_generators(), 16);
        let action = discretize_action(&lf, FieldConfig::random(&lf, &mut ChaCha8Rng::seed_from_u64(3))).unwrap();
        // Only scalars and c̄c bilinears appear.
        for (mask, _) in action.s.terms() {
            let ghosts = (0..8).filter(|&i| mask >> lf.ghost(i) & 1 == 1).count();
            let antighosts = (0..8).filter(|&i| mask >> lf.antighost(i) & 1 == 1).count();
            assert!(mask == 0 || (ghosts == 1 && antighosts == 1 && mask.count_ones() == 2));
        }
        assert!(action.brst_check().unwrap().is_zero());
    }

    #[test]
    fn nonlinear_flow_is_brst_invariant_and_breaking_is_detected() {
        let lf = one_dim("q^3 - 2*q");
        let config = FieldConfig::random(&lf, &mut ChaCha8Rng::seed_from_u64(11));
        let action = discretize_action(&lf, config.clone()).unwrap();
        assert!(action.brst_check().unwrap().is_zero());

        // A bare λ² term is itself invariant.
        let lam2 = LatticeAction::new(&lf, config.clone(), Some(Breaking::LambdaSquared)).unwrap();
        assert!(lam2.brst_check().unwrap().is_zero());

        // Δt Σ λ² q varies by Δt Σ λᵢ² ε̄cᵢ.
        let broken = LatticeAction::new(&lf, config.clone(), Some(Breaking::LambdaSquaredField)).unwrap();
        let n = lf.algebra_size();
        let eps = GrassmannElement::generator(n, EPSILON_BAR);
        let mut expected = GrassmannElement::zero(n);
        for (i, l) in config.lambda.iter().enumerate() {
            let w = GrassmannElement::scalar(n, c_real(&lf.grid.dt * l * l));
            expected = &expected + &(&w * &(&eps * &GrassmannElement::generator(n, lf.ghost(i))));
        }
        assert_eq!(broken.brst_check().unwrap(), expected);
    }

    #[test]
    fn superfield_identity_up_to_multiplier_reflection() {
        let lf = one_dim("q^3 - 2*q");
        let config = FieldConfig::random(&lf, &mut ChaCha8Rng::seed_from_u64(5));
        let action = discretize_action(&lf, config.clone()).unwrap();
        let report = action.superfield_check().unwrap();
        assert!(report.residual.is_zero());
        // Literal comparison with −iS leaves 2iλ·∇𝒜.
        let mut lam_grad = BigRational::zero();
        for (l, g) in config.lambda.iter().zip(&lf.gradient) {
            lam_grad += l * g.evaluate_exact(&config.values).unwrap().as_rational().unwrap();
        }
        let expected = GrassmannElement::scalar(lf.algebra_size(), c_i() * c_real(lam_grad * rat(2, 1)));
        assert_eq!(report.literal_residual, expected);
    }

    #[test]
    fn cubic_user_action_satisfies_superfield_identity() {
        let g = grid(4);
        let mut action = SymExpr::zero();
        for k in 0..3 {
            let q = SymExpr::symbol(&lattice_symbol("q", k));
            let next = SymExpr::symbol(&lattice_symbol("q", k + 1));
            let diff = &next - &q;
            action += &(&(&diff * &diff).scale(&Coeff::from_int(5)) - &q.pow(3).scale(&Coeff::from_ratio(1, 10)));
        }
        let lf = LatticeFunctional::from_action(g, vec!["q".into()], action, &[] as &[&str], Boundary::Fixed).unwrap();
        let action = discretize_action(&lf, FieldConfig::random(&lf, &mut ChaCha8Rng::seed_from_u64(9))).unwrap();
        assert!(action.superfield_check().unwrap().residual.is_zero());
        assert!(action.brst_check().unwrap().is_zero());
    }

    #[test]
    fn sweep_is_reproducible() {
        let space = PhaseSpace::doubled(&["x"], &["k"]).unwrap();
        let f = vec![space.parse("k*x^2").unwrap()];
        let a = random_sweep(&["x"], &f, &["k"], 3..=4, 3, 42).unwrap();
        assert!(a.passed());
        assert_eq!(a.cases.len(), 6);
        let lf = LatticeFunctional::thooft(&["x"], &f, &["k"], grid(3), Boundary::Fixed).unwrap();
        let c1 = FieldConfig::random(&lf, &mut trial_rng(42, 3, 1));
        let c2 = FieldConfig::random(&lf, &mut trial_rng(42, 3, 1));
        assert_eq!(c1, c2);
    }
}
