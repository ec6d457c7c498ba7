//! Staged verification of a compiled system.
//!
//! Each stage returns an ordered list of [`Check`]s; a stage that cannot
//! run records a failing check naming the error instead of aborting, so a
//! report always says how far the pipeline got.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::CompiledSystem;
use crate::dirac::{
    build_h_split, information_loss_constraint, solve_multipliers, verify_charges, InformationLoss,
};
use crate::dynamics::{
    conservation_report, detm_convergence, detm_identity_check, integrate, wronskian_check, Flow, Trajectory,
};
use crate::gauge::{apply_rescalings, reduce, validate_gauge, ReducedSystem, RootCertificate};
use crate::ghost::{
    alpha_structure_check, broken_control, doubled_kinetic_form, euler_functional_check, random_sweep, Boundary, Grid,
    LatticeFunctional,
};
use crate::phasespace::{PhaseSpace, SymExpr};
use crate::report::{Check, Recorder, Report};
use crate::spectra::{
    duffing_constants_check, free_ring_levels, grid_spectrum_1d, oscillator_levels, partition_check, unit_oscillator_partition,
    BoundaryCondition, DuffingConstants, SpectrumReport, Verdict,
};

/// Ground state of `−½ d²/dx² + x⁴`, from an independent high-resolution solve.
pub const QUARTIC_GROUND_STATE: f64 = 0.6679862592;

/// Tolerance for the drift of conserved charges along a trajectory.
pub const CONSERVATION_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub t1: f64,
    pub t2: f64,
    pub dt: f64,
    /// Initial point; all ones when absent.
    pub q0: Option<Vec<f64>>,
    /// Initial auxiliary point; all ones when absent.
    pub qbar0: Option<Vec<f64>>,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self { t1: 0.0, t2: 5.0, dt: 1e-3, q0: None, qbar0: None }
    }
}

#[derive(Clone, Debug)]
pub struct BrstOptions {
    pub slices: RangeInclusive<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BrstOptions {
    fn default() -> Self {
        Self { slices: 3..=6, trials: 20, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub half_width: f64,
    pub n: usize,
    pub levels: usize,
    pub beta: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { half_width: 10.0, n: 2000, levels: 5, beta: 2.0 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub simulate: SimulateOptions,
    pub brst: BrstOptions,
    pub spectrum: SpectrumOptions,
}

/// Numeric values of the parameters: explicit bindings first, then any
/// rescaling of a parameter that evaluates under those bindings.
pub fn numeric_params(c: &CompiledSystem) -> BTreeMap<String, f64> {
    let empty = BTreeMap::new();
    let mut out: BTreeMap<String, f64> =
        c.param_values.iter().filter_map(|(k, v)| Some((k.clone(), v.evaluate(&empty).ok()?))).collect();
    for r in &c.rescalings {
        if c.sys.space.is_param(&r.symbol) && !out.contains_key(&r.symbol) {
            if let Ok(v) = r.replacement.evaluate(&out) {
                out.insert(r.symbol.clone(), v);
            }
        }
    }
    out
}

fn charge_labels(c: &CompiledSystem) -> Vec<(String, SymExpr)> {
    c.charges.charges.iter().enumerate().map(|(i, e)| (format!("C{}", i + 1), e.clone())).collect()
}

fn expect(out: &mut Vec<Check>, id: &str, what: &str, got: &SymExpr, want: &Option<SymExpr>) {
    if let Some(w) = want {
        out.push(Check::exact(id, format!("{what} equals the expected form"), got, w));
    }
}

fn all_vanish(out: &mut Vec<Check>, id: &str, what: &str, exprs: &[SymExpr]) {
    let mut acc = SymExpr::zero();
    let mut first_nonzero = None;
    for e in exprs {
        if !e.is_zero() && first_nonzero.is_none() {
            first_nonzero = Some(e.clone());
        }
        acc += e;
    }
    let witness = first_nonzero.unwrap_or(acc);
    out.push(Check::vanishes(id, what, &witness));
}

/// Constraint analysis: multipliers, charge conservation, the split of
/// `H`, the first-class constraint and its certificates.
pub fn analyze_checks(c: &CompiledSystem) -> Vec<Check> {
    let mut out = Vec::new();
    analyze_into(c, &mut out);
    out
}

fn analyze_into(c: &CompiledSystem, out: &mut Vec<Check>) -> Option<InformationLoss> {
    let sys = &c.sys;
    let primary = match sys.primary_constraints() {
        Ok(p) => p,
        Err(e) => {
            out.push(Check::error("analyze.primary", "primary constraints", e));
            return None;
        }
    };
    match solve_multipliers(sys, &primary) {
        Ok(m) => {
            out.push(Check::exact(
                "analyze.primary.det",
                "det {φᵢ, φⱼ} of the primary constraints is 1",
                &SymExpr::constant(m.determinant.clone()),
                &SymExpr::one(),
            ));
            out.push(Check::flag(
                "analyze.multipliers",
                "{φ₁ᵃ, H̄} = −∂H̄/∂qₐ and {φ₂ᵃ, H̄} = −fₐ",
                m.flow_matches_closed_form,
                m.multipliers.iter().map(SymExpr::to_string).collect::<Vec<_>>().join("; "),
            ));
        }
        Err(e) => out.push(Check::error("analyze.multipliers", "solve for the Lagrange multipliers", e)),
    }
    out.push(Check::info(
        "analyze.classification.primary",
        "primary constraints",
        format!("{} second class, no secondary constraints", primary.constraints.len()),
    ));
    match verify_charges(sys, &c.charges) {
        Ok(report) => {
            for ch in &report.checks {
                out.push(Check::vanishes(
                    format!("analyze.charge[{}].conserved", ch.index),
                    format!("{{C{}, H}} = 0", ch.index + 1),
                    &ch.bracket_with_h,
                ));
                if let Some(k) = &ch.compatibility {
                    out.push(Check::vanishes(
                        format!("analyze.charge[{}].auxiliary", ch.index),
                        format!("C{} is compatible with the auxiliary flow", ch.index + 1),
                        k,
                    ));
                }
            }
        }
        Err(e) => {
            out.push(Check::error("analyze.charges", "charge conservation", e));
            return None;
        }
    }
    match build_h_split(sys, &c.charges) {
        Ok(split) => {
            out.push(Check::vanishes("analyze.split.difference", "H₊ − H₋ = H", &split.difference_residual));
            out.push(Check::vanishes("analyze.split.minus", "H₋ = 0 forces H = Σ aᵢCᵢ", &split.minus_square_residual));
        }
        Err(e) => out.push(Check::error("analyze.split", "split of H", e)),
    }
    let il = match information_loss_constraint(sys, &c.charges) {
        Ok(il) => il,
        Err(e) => {
            out.push(Check::error("analyze.phi", "first-class constraint", e));
            return None;
        }
    };
    out.push(Check::exact(
        "analyze.phi.primary_det",
        "det of the second-class block is 1",
        &SymExpr::constant(il.primary_determinant.clone()),
        &SymExpr::one(),
    ));
    out.push(Check::vanishes("analyze.phi.consistency", "Σ eᵢ {φᵢ, H̄} = 0", &il.consistency_residual));
    all_vanish(out, "analyze.phi.null_vector", "e · {φᵢ, φⱼ} = 0", &il.set.null_residual().unwrap_or_default());
    all_vanish(out, "analyze.phi.first_class", "{φ, φᵢ} ≈ 0 on the second-class surface", &il.weak_brackets);
    out.push(Check::vanishes("analyze.phi.weak_identity", "φ ≈ H − Σ aᵢCᵢ", &il.weak_identity_residual));
    expect(out, "analyze.phi.expected", "φ", &il.phi, &c.expected.phi);
    out.push(Check::info(
        "analyze.classification",
        "constraint classes",
        format!("{} second class, 1 first class (φ)", il.set.second_class().count()),
    ));
    Some(il)
}

/// Gauge fixing and reduction, on top of the analysis stage.
pub fn reduce_checks(c: &CompiledSystem) -> Vec<Check> {
    let mut scratch = Vec::new();
    let Some(il) = analyze_into(c, &mut scratch) else {
        return scratch;
    };
    let mut out = Vec::new();
    reduce_into(c, &il, &mut out);
    out
}

fn reduce_into(c: &CompiledSystem, il: &InformationLoss, out: &mut Vec<Check>) -> Option<ReducedSystem> {
    let sys = &c.sys;
    match validate_gauge(sys, il, &c.chi) {
        Ok(g) => {
            all_vanish(
                out,
                "reduce.gauge.second_class",
                "{χ, φᵢ} = 0 for every second-class constraint",
                &g.chi_second_class.iter().map(|(_, b)| b.clone()).collect::<Vec<_>>(),
            );
            out.push(Check::flag("reduce.gauge.admissible", "{χ, φ} ≠ 0", !g.chi_phi.is_zero(), g.chi_phi.to_string()));
            expect(out, "reduce.gauge.chi_phi", "{χ, φ}", &g.chi_phi, &c.expected.chi_phi_bracket);
        }
        Err(e) => {
            out.push(Check::error("reduce.gauge", "gauge condition", e));
            return None;
        }
    }
    match c.map.check_symplectic() {
        Ok(()) => out.push(Check::flag("reduce.symplectic", "MᵀJM = J for the canonical map", true, "exact")),
        Err(e) => out.push(Check::error("reduce.symplectic", "MᵀJM = J for the canonical map", e)),
    }
    let r = match reduce(sys, il, &c.chi, &c.map) {
        Ok(r) => r,
        Err(e) => {
            out.push(Check::error("reduce", "reduction to the physical surface", e));
            return None;
        }
    };
    out.push(Check::info("reduce.k", "K on the physical surface", r.k.to_string()));
    expect(out, "reduce.k.expected", "K", &r.k, &c.expected.k);
    out.push(Check::info("reduce.phi_surface", "φ on the physical surface", r.phi_surface.to_string()));
    expect(out, "reduce.phi_surface.expected", "φ|Γ*", &r.phi_surface, &c.expected.phi_surface);
    let root = match &r.q1_star_poly {
        Some(p) => p.to_string(),
        None => format!("({}) / ({})", r.q1_star.numerator, r.q1_star.denominator),
    };
    out.push(Check::info("reduce.q1_star", "unique root Q₁*", root));
    if let Some(want) = &c.expected.q1_star {
        match &r.q1_star_poly {
            Some(got) => out.push(Check::exact("reduce.q1_star.expected", "Q₁* equals the expected form", got, want)),
            None => out.push(Check::error("reduce.q1_star.expected", "Q₁* equals the expected form", "Q₁* is not polynomial")),
        }
    }
    let cert = match r.certificate {
        RootCertificate::Linear => "φ|Γ* is affine in Q₁".to_string(),
        RootCertificate::PerfectPower(n) => format!("φ|Γ* is a perfect power of degree {n} in Q₁"),
    };
    out.push(Check::info("reduce.certificate", "uniqueness of the gauge-fixed root", cert));
    out.push(Check::info("reduce.kstar", "K* = K(Q₁*)", r.kstar.to_string()));
    expect(out, "reduce.kstar.expected", "K*", &r.kstar, &c.expected.kstar);
    if !c.rescalings.is_empty() {
        match apply_rescalings(&r.kstar, &c.rescalings) {
            Ok(e) => {
                out.push(Check::info("reduce.emergent", "K* after rescalings", e.to_string()));
                expect(out, "reduce.emergent.expected", "rescaled K*", &e, &c.expected.emergent);
                if !c.param_values.is_empty() {
                    match e.substitute(&c.param_values) {
                        Ok(bound) => out.push(Check::info("reduce.emergent.bound", "with numeric parameters", bound.to_string())),
                        Err(err) => out.push(Check::error("reduce.emergent.bound", "with numeric parameters", err)),
                    }
                }
            }
            Err(e) => out.push(Check::error("reduce.emergent", "K* after rescalings", e)),
        }
    }
    Some(r)
}

fn ones(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// Integrate the doubled flow and check conservation, det M and the
/// Wronskian. Returns the trajectory for export.
pub fn simulate_checks(c: &CompiledSystem, opts: &SimulateOptions) -> (Option<Trajectory>, Vec<Check>) {
    let mut out = Vec::new();
    let params = numeric_params(c);
    let flow = match Flow::from_system(&c.sys, &params) {
        Ok(f) => f,
        Err(e) => {
            out.push(Check::error("simulate.flow", "compile the flow", e));
            return (None, out);
        }
    };
    let n = flow.dim();
    let q0 = opts.q0.clone().unwrap_or_else(|| ones(n));
    let qb0 = opts.qbar0.clone().unwrap_or_else(|| ones(n));
    let traj = match integrate(&flow, &q0, &qb0, opts.t1, opts.t2, opts.dt) {
        Ok(t) => t,
        Err(e) => {
            out.push(Check::error("simulate.integrate", "integrate the doubled flow", e));
            return (None, out);
        }
    };
    out.push(Check::flag(
        "simulate.integrate",
        "trajectory stays finite",
        traj.diagnostic.is_none(),
        traj.diagnostic.clone().unwrap_or_else(|| format!("{} steps", traj.steps())),
    ));
    match conservation_report(&traj, &charge_labels(c), &params) {
        Ok(drifts) => {
            for d in drifts {
                out.push(Check::numeric(
                    format!("simulate.conservation.{}", d.label),
                    format!("relative drift of {} along the trajectory", d.label),
                    d.max_drift,
                    0.0,
                    d.max_drift,
                    CONSERVATION_TOLERANCE,
                ));
            }
        }
        Err(e) => out.push(Check::error("simulate.conservation", "charge drift", e)),
    }
    match detm_identity_check(&flow, &traj) {
        Ok(d) => {
            let mut chk = Check::numeric(
                "simulate.detm",
                format!("Π det(1 + ½Δt J) against exp(½∫∇·f) at Δt = {}", opts.dt),
                d.lhs,
                d.rhs,
                d.rel_error,
                f64::INFINITY,
            );
            chk.status = crate::report::Status::Info;
            out.push(chk);
        }
        Err(e) => out.push(Check::error("simulate.detm", "det M identity", e)),
    }
    let dts = [4.0 * opts.dt, 2.0 * opts.dt, opts.dt];
    match detm_convergence(&flow, &q0, &qb0, opts.t2 - opts.t1, &dts) {
        Ok(conv) => out.push(Check::numeric(
            "simulate.detm.order",
            "det M discretisation error is first order in Δt",
            conv.slope,
            1.0,
            conv.slope - 1.0,
            0.2,
        )),
        Err(e) => out.push(Check::error("simulate.detm.order", "det M convergence", e)),
    }
    match wronskian_check(&traj) {
        Ok(w) => out.push(Check::numeric(
            "simulate.wronskian",
            "det K(t₂)/det K(t₁) = exp(−∫∇·f)",
            w.ratio,
            w.expected,
            w.rel_error,
            1e-6,
        )),
        Err(e) => out.push(Check::error("simulate.wronskian", "Wronskian identity", e)),
    }
    (Some(traj), out)
}

fn euler_point(lf: &LatticeFunctional, seed: u64) -> BTreeMap<String, f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lf.action.symbols().into_iter().map(|s| (s, rng.gen_range(-1.0..1.0))).collect()
}

/// Ghost-sector checks: BRST and superfield invariance on random lattice
/// configurations, a deliberately broken control, the Euler identity of
/// the action and the kinetic structure.
pub fn brst_checks(c: &CompiledSystem, opts: &BrstOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let coords = c.sys.coords().to_vec();
    let params = c.sys.space.params().to_vec();
    let f = &c.sys.f;
    match random_sweep(&coords, f, &params, opts.slices.clone(), opts.trials, opts.seed) {
        Ok(sweep) => {
            for n in opts.slices.clone() {
                let cases: Vec<_> = sweep.cases.iter().filter(|k| k.slices == n).collect();
                let bad: Vec<_> = cases.iter().filter(|k| !k.passed()).collect();
                let detail = match bad.first() {
                    None => format!("{} configurations, {} ghost generators", cases.len(), cases.first().map_or(0, |k| k.ghost_generators)),
                    Some(k) => format!(
                        "trial {}: {} BRST terms, {} superfield terms",
                        k.trial, k.brst_terms, k.superfield_terms
                    ),
                };
                out.push(Check::flag(
                    format!("brst.sweep.slices{n}"),
                    format!("δS = 0 and ∫dθ̄dθ residual = 0 on {n} slices"),
                    bad.is_empty(),
                    detail,
                ));
            }
        }
        Err(e) => out.push(Check::error("brst.sweep", "BRST sweep", e)),
    }
    let control_slices = (*opts.slices.start()).max(3);
    match broken_control(&coords, f, &params, control_slices, opts.seed) {
        Ok(delta) => out.push(Check::flag(
            "brst.control",
            "an added Δt Σ λ²q term breaks BRST invariance",
            !delta.is_zero(),
            format!("{} nonzero terms", delta.len()),
        )),
        Err(e) => out.push(Check::error("brst.control", "broken control", e)),
    }
    let euler = (|| {
        let grid = Grid::new(6, BigRational::new(1.into(), 20.into()))?;
        let lf = LatticeFunctional::thooft(&coords, f, &params, grid, Boundary::Free)?;
        let alpha: Vec<f64> = (0..2 * coords.len()).map(|i| if i < coords.len() { 0.0 } else { 1.0 }).collect();
        euler_functional_check(&lf, &alpha, &euler_point(&lf, opts.seed), 1e-5)
    })();
    match euler {
        Ok(r) => out.push(Check::numeric(
            "brst.euler",
            "𝒜 = Σ q̄ ∂𝒜/∂q̄ for the lattice action",
            r,
            0.0,
            r,
            1e-8,
        )),
        Err(e) => out.push(Check::error("brst.euler", "Euler identity", e)),
    }
    let n = coords.len();
    match alpha_structure_check(&doubled_kinetic_form(n)) {
        Ok((_, rep)) => out.push(Check::flag(
            "brst.alpha",
            "α = diag(0,…,0,1,…,1) of rank N for the doubled kinetic form",
            rep.passed(2 * n),
            format!("rank {}, α = {:?}", rep.rank, rep.alpha),
        )),
        Err(e) => out.push(Check::error("brst.alpha", "kinetic structure", e)),
    }
    let mut odd = doubled_kinetic_form(n);
    for row in &mut odd {
        row.push(BigRational::from_integer(0.into()));
    }
    odd.push(vec![BigRational::from_integer(0.into()); 2 * n + 1]);
    let rejected = alpha_structure_check(&odd);
    out.push(Check::flag(
        "brst.alpha.odd",
        "odd-dimensional kinetic forms are rejected",
        rejected.is_err(),
        rejected.err().map_or_else(|| "accepted".to_string(), |e| e.to_string()),
    ));
    out
}

/// `K = αP² + V(Q)` for a single physical pair, with `α` a positive number.
fn one_dimensional_form(k: &SymExpr, q: &str, p: &str) -> Option<(f64, SymExpr)> {
    let by_p = k.coefficients_in(p)?;
    if by_p.len() != 3 || !by_p[1].is_zero() {
        return None;
    }
    let alpha = by_p[2].as_constant()?.to_f64();
    let v = by_p[0].clone();
    (alpha > 0.0 && v.symbols().iter().all(|s| s == q)).then_some((alpha, v))
}

/// Lowest levels of the emergent Hamiltonian against closed forms, or, for
/// the Duffing-coupled system, the coupling constants and the quartic
/// member. Returns the spectrum that was computed, if any.
pub fn spectrum_checks(c: &CompiledSystem, opts: &SpectrumOptions) -> (Option<SpectrumReport>, Vec<Check>) {
    let mut out = Vec::new();
    let mut scratch = Vec::new();
    let Some(il) = analyze_into(c, &mut scratch) else {
        out.append(&mut scratch);
        return (None, out);
    };
    let Some(r) = reduce_into(c, &il, &mut scratch) else {
        out.append(&mut scratch);
        return (None, out);
    };
    let emergent = apply_rescalings(&r.kstar, &c.rescalings).and_then(|e| Ok(e.substitute(&c.param_values)?));
    let k = match emergent {
        Ok(k) => k,
        Err(e) => {
            out.push(Check::error("spectrum.emergent", "emergent Hamiltonian", e));
            return (None, out);
        }
    };
    out.push(Check::info("spectrum.emergent", "emergent Hamiltonian", k.to_string()));
    let pairs = r.physical_pairs();
    if let [(q, p)] = pairs.as_slice() {
        let Some((alpha, v)) = one_dimensional_form(&k, q, p) else {
            out.push(Check::info("spectrum.form", "not of the form αP² + V(Q)", "no grid spectrum computed"));
            return (None, out);
        };
        return one_dimensional_spectrum(alpha, &v, q, opts, out);
    }
    duffing_spectrum(&r.kstar, &pairs, opts, out)
}

fn one_dimensional_spectrum(
    alpha: f64,
    v: &SymExpr,
    q: &str,
    opts: &SpectrumOptions,
    mut out: Vec<Check>,
) -> (Option<SpectrumReport>, Vec<Check>) {
    let coeffs = v.coefficients_in(q).unwrap_or_default();
    let constant_v = v.symbols().is_empty();
    if constant_v {
        // Kinetic only: free particle on a periodic ring.
        let shift = v.as_constant().map_or(0.0, |c| c.to_f64());
        let run = grid_spectrum_1d(-alpha, &SymExpr::zero(), q, opts.half_width, opts.n, opts.levels, BoundaryCondition::Periodic)
            .and_then(|s| {
                let reference = free_ring_levels(1.0 / (2.0 * alpha), opts.half_width, opts.n, opts.levels);
                s.with_reference(reference)
            });
        return match run {
            Ok(s) => {
                let dev = s.max_abs_dev.unwrap_or(f64::NAN);
                out.push(Check::info("spectrum.shift", "constant energy offset", format!("{shift}")));
                out.push(Check::numeric(
                    "spectrum.free",
                    format!("lowest {} levels match the free dispersion on the periodic grid", opts.levels),
                    dev,
                    0.0,
                    dev,
                    1e-8,
                ));
                (Some(s), out)
            }
            Err(e) => {
                out.push(Check::error("spectrum.free", "free-particle spectrum", e));
                (None, out)
            }
        };
    }
    if coeffs.len() == 3 && coeffs[1].is_zero() {
        let Some(cq) = coeffs[2].as_constant().map(|c| c.to_f64()).filter(|x| *x > 0.0) else {
            out.push(Check::info("spectrum.form", "quadratic potential is not confining", v.to_string()));
            return (None, out);
        };
        let offset = coeffs[0].as_constant().map_or(0.0, |c| c.to_f64());
        let omega = 2.0 * (alpha * cq).sqrt();
        // Enough levels for the thermal tail at β.
        let count = opts.levels.max(((40.0 / (opts.beta * omega)).ceil() as usize).max(12));
        let run = grid_spectrum_1d(-alpha, v, q, opts.half_width, opts.n, count.min(opts.n), BoundaryCondition::Dirichlet);
        let s = match run {
            Ok(s) => s,
            Err(e) => {
                out.push(Check::error("spectrum.oscillator", "oscillator spectrum", e));
                return (None, out);
            }
        };
        let ladder: Vec<f64> = oscillator_levels(opts.levels).into_iter().map(|e| omega * e + offset).collect();
        let shown = SpectrumReport { eigenvalues: s.eigenvalues[..opts.levels].to_vec(), ..s.clone() };
        let shown = match shown.with_reference(ladder) {
            Ok(x) => x,
            Err(e) => {
                out.push(Check::error("spectrum.oscillator", "oscillator spectrum", e));
                return (None, out);
            }
        };
        let dev = shown.max_abs_dev.unwrap_or(f64::NAN);
        out.push(Check::numeric(
            "spectrum.oscillator",
            format!("lowest {} levels equal ω(n + ½) with ω = {omega}", opts.levels),
            dev,
            0.0,
            dev,
            1e-3,
        ));
        let beta_eff = opts.beta * omega;
        let scaled = SpectrumReport {
            eigenvalues: s.eigenvalues.iter().map(|e| (e - offset) / omega).collect(),
            ..s.clone()
        };
        match partition_check(&scaled, opts.beta, unit_oscillator_partition(opts.beta), 1e-6) {
            Ok(z) => out.push(Check::numeric(
                "spectrum.partition",
                format!("Σ e^(−βEₙ) against the closed form at β = {} (ωβ = {beta_eff})", opts.beta),
                z.z_spectrum,
                z.z_reference,
                z.rel_error,
                1e-4,
            )),
            Err(e) => out.push(Check::error("spectrum.partition", "partition function", e)),
        }
        return (Some(shown), out);
    }
    match grid_spectrum_1d(-alpha, v, q, opts.half_width, opts.n, opts.levels, BoundaryCondition::Dirichlet) {
        Ok(s) => {
            out.push(Check::info(
                "spectrum.levels",
                "lowest levels (no closed form)",
                format!("{:?}", s.eigenvalues),
            ));
            (Some(s), out)
        }
        Err(e) => {
            out.push(Check::error("spectrum.levels", "grid spectrum", e));
            (None, out)
        }
    }
}

fn duffing_spectrum(
    kstar: &SymExpr,
    pairs: &[(String, String)],
    opts: &SpectrumOptions,
    mut out: Vec<Check>,
) -> (Option<SpectrumReport>, Vec<Check>) {
    let [(_, p1), (q2, _)] = pairs else {
        out.push(Check::info("spectrum.form", "no one-dimensional reduction available", format!("{} physical pairs", pairs.len())));
        return (None, out);
    };
    let constants = match DuffingConstants::from_kstar(kstar, p1, q2) {
        Ok(k) => k,
        Err(e) => {
            out.push(Check::error("spectrum.duffing", "coupling constants", e));
            return (None, out);
        }
    };
    let rebuilt = &(&(&constants.a * &SymExpr::symbol(p1).pow(2))
        + &(&constants.b * &(&SymExpr::symbol(p1) * &SymExpr::symbol(q2).pow(2))))
        + &(&constants.c * &SymExpr::symbol(q2).pow(4));
    out.push(Check::exact("spectrum.duffing.form", "K* = 𝒜P̄₁² + ℬP̄₁Q̄₂² + 𝒞Q̄₂⁴", kstar, &rebuilt));
    let shown = DuffingConstants::displayed();
    for (name, got, want) in [("A", &constants.a, &shown.a), ("B", &constants.b, &shown.b), ("C", &constants.c, &shown.c)] {
        out.push(Check::exact(format!("spectrum.duffing.{name}"), format!("coupling {name} of K*"), got, want));
    }
    match duffing_constants_check(&constants) {
        Ok(report) => {
            for (i, s) in report.scenarios.iter().enumerate() {
                let verdicts: Vec<String> = s
                    .constants
                    .iter()
                    .map(|v| {
                        let tag = match &v.verdict {
                            Verdict::Match => "match".to_string(),
                            Verdict::SignFlip => "sign flip".to_string(),
                            Verdict::Factor(f) => format!("factor {f}"),
                            Verdict::Mismatch => "mismatch".to_string(),
                        };
                        format!("{}: {} ({} vs {})", v.name, tag, v.value, v.target)
                    })
                    .collect();
                out.push(Check::info(
                    format!("spectrum.duffing.verdict[{i}]"),
                    format!("{}: constants against 1/(2m₁), 1/√(m₁m₂), 1/m₂", s.label),
                    verdicts.join("; "),
                ));
            }
        }
        Err(e) => out.push(Check::error("spectrum.duffing.verdict", "Duffing parameter choices", e)),
    }
    let x = "x";
    let space = PhaseSpace::doubled(&[x], &[] as &[&str]).expect("fixed names");
    let quartic = space.parse("x^4").expect("fixed formula");
    match grid_spectrum_1d(-0.5, &quartic, x, opts.half_width, opts.n, 1, BoundaryCondition::Dirichlet)
        .and_then(|s| s.with_reference(vec![QUARTIC_GROUND_STATE]))
    {
        Ok(s) => {
            let e0 = s.eigenvalues[0];
            out.push(Check::numeric(
                "spectrum.quartic",
                "ground state of −½ d²/dx² + x⁴",
                e0,
                QUARTIC_GROUND_STATE,
                e0 - QUARTIC_GROUND_STATE,
                1e-4,
            ));
            (Some(s), out)
        }
        Err(e) => {
            out.push(Check::error("spectrum.quartic", "quartic ground state", e));
            (None, out)
        }
    }
}

/// Every stage, in pipeline order.
pub fn verify(c: &CompiledSystem, opts: &VerifyOptions, rec: Recorder) -> Report {
    let mut checks = Vec::new();
    checks.extend(rec.time(|| analyze_checks(c)));
    checks.extend(rec.time(|| {
        let mut out = Vec::new();
        if let Some(il) = analyze_into(c, &mut Vec::new()) {
            reduce_into(c, &il, &mut out);
        }
        out
    }));
    checks.extend(rec.time(|| simulate_checks(c, &opts.simulate).1));
    checks.extend(rec.time(|| brst_checks(c, &opts.brst)));
    checks.extend(rec.time(|| spectrum_checks(c, &opts.spectrum).1));
    Report::new(c.spec.name.clone(), checks)
}
