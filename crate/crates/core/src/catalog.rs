//! Built-in systems and the JSON system-spec format.
//!
//! A [`SystemSpec`] is plain data: every expression is a string in the
//! expression grammar, so the file format stays exact and human-editable.
//! [`SystemSpec::compile`] parses and validates everything eagerly and
//! produces a [`CompiledSystem`] that drives the symbolic pipeline.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirac::{
    build_extended_system, build_h_split, check_p_independence, information_loss_constraint, solve_multipliers,
    verify_charges, ChargeReport, ChargeSpec, DiracError, ExtendedSystem, HSplit, InformationLoss,
    MultiplierSolution,
};
use crate::gauge::{reduce, validate_gauge, CanonicalMap, GaugeError, GaugeReport, ReducedSystem, Rescaling};
use crate::phasespace::{PhaseSpace, PhaseSpaceError, SymExpr};

pub const BUILTIN_NAMES: [&str; 3] = ["pendulum-free", "pendulum-oscillator", "roessler-duffing"];

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown builtin `{0}` (available: pendulum-free, pendulum-oscillator, roessler-duffing)")]
    UnknownBuiltin(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("schema error at line {line}, column {column}: {msg}")]
    Schema { line: usize, column: usize, msg: String },
    #[error("{coordinates} coordinates but {f} entries in f")]
    CountMismatch { coordinates: usize, f: usize },
    #[error("{field}: {source}")]
    Expr { field: String, source: PhaseSpaceError },
    #[error("map: {0}")]
    Map(GaugeError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeEntry {
    pub expr: String,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSpec {
    /// New variables as conjugate pairs: `Q1, P1, Q2, P2, …`.
    pub labels: Vec<String>,
    /// Rows act on the old vector `(q_a, p_a)…, (qb_a, pb_a)…`.
    pub matrix: Vec<Vec<String>>,
    pub offset: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RescalingSpec {
    pub symbol: String,
    pub expr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Regression anchors; all optional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kstar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_phi_bracket: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1_star: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_surface: Option<String>,
    /// `K*` after applying the rescalings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emergent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub coordinates: Vec<String>,
    pub f: Vec<String>,
    pub charges: Vec<ChargeEntry>,
    pub gauge: String,
    pub map: MapSpec,
    /// Parameter names with optional numeric values (expression strings).
    pub params: BTreeMap<String, Option<String>>,
    #[serde(default)]
    pub rescalings: Vec<RescalingSpec>,
    #[serde(default)]
    pub expected: Expected,
}

/// Parsed regression anchors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpectedExprs {
    pub kstar: Option<SymExpr>,
    pub chi_phi_bracket: Option<SymExpr>,
    pub phi: Option<SymExpr>,
    pub k: Option<SymExpr>,
    pub q1_star: Option<SymExpr>,
    pub phi_surface: Option<SymExpr>,
    pub emergent: Option<SymExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledSystem {
    pub spec: SystemSpec,
    pub sys: ExtendedSystem,
    pub charges: ChargeSpec,
    pub chi: SymExpr,
    pub map: CanonicalMap,
    /// Phase space of the new variables.
    pub target: PhaseSpace,
    pub rescalings: Vec<Rescaling>,
    pub param_values: BTreeMap<String, SymExpr>,
    pub expected: ExpectedExprs,
}

/// Everything the symbolic pipeline produces for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub multipliers: MultiplierSolution,
    pub charges: ChargeReport,
    pub split: HSplit,
    pub info: InformationLoss,
    pub gauge: GaugeReport,
    pub reduced: ReducedSystem,
}

fn parse_field(space: &PhaseSpace, field: impl Into<String>, text: &str) -> Result<SymExpr, CatalogError> {
    space.parse(text).map_err(|source| CatalogError::Expr { field: field.into(), source })
}

fn parse_opt(space: &PhaseSpace, field: &str, text: &Option<String>) -> Result<Option<SymExpr>, CatalogError> {
    text.as_deref().map(|t| parse_field(space, format!("expected.{field}"), t)).transpose()
}

impl SystemSpec {
    pub fn param_names(&self) -> Vec<String> {
        self.params.keys().cloned().collect()
    }

    pub fn space(&self) -> Result<PhaseSpace, CatalogError> {
        PhaseSpace::doubled(&self.coordinates, &self.param_names())
            .map_err(|source| CatalogError::Expr { field: "coordinates".into(), source })
    }

    /// Parse and validate every field.
    pub fn compile(&self) -> Result<CompiledSystem, CatalogError> {
        if self.coordinates.len() != self.f.len() {
            return Err(CatalogError::CountMismatch { coordinates: self.coordinates.len(), f: self.f.len() });
        }
        let space = self.space()?;
        let f = self
            .f
            .iter()
            .enumerate()
            .map(|(i, t)| parse_field(&space, format!("f[{i}]"), t))
            .collect::<Result<Vec<_>, _>>()?;
        let sys = build_extended_system(space.clone(), f)?;
        let mut charges = Vec::new();
        let mut coeffs = Vec::new();
        for (i, c) in self.charges.iter().enumerate() {
            charges.push(parse_field(&space, format!("charges[{i}].expr"), &c.expr)?);
            coeffs.push(parse_field(&space, format!("charges[{i}].coeff"), &c.coeff)?);
        }
        let charges = ChargeSpec::new(charges, coeffs)?;
        check_p_independence(&sys, &charges)?;
        let chi = parse_field(&space, "gauge", &self.gauge)?;

        let n = 4 * self.coordinates.len();
        if self.map.matrix.len() != n || self.map.offset.len() != n || self.map.labels.len() != n {
            return Err(CatalogError::Map(GaugeError::Dimension {
                expected: n,
                rows: self.map.matrix.len(),
                cols: self.map.matrix.first().map_or(0, Vec::len),
            }));
        }
        let mut matrix = Vec::with_capacity(n);
        for (r, row) in self.map.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(CatalogError::Map(GaugeError::Dimension { expected: n, rows: n, cols: row.len() }));
            }
            matrix.push(
                row.iter()
                    .enumerate()
                    .map(|(c, t)| parse_field(&space, format!("map.matrix[{r}][{c}]"), t))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        let offset = self
            .map
            .offset
            .iter()
            .enumerate()
            .map(|(i, t)| parse_field(&space, format!("map.offset[{i}]"), t))
            .collect::<Result<Vec<_>, _>>()?;
        let map = CanonicalMap { labels: self.map.labels.clone(), matrix, offset };
        map.check_shape(&space).map_err(CatalogError::Map)?;
        map.check_symplectic().map_err(CatalogError::Map)?;
        let target = map.target_space(&space).map_err(CatalogError::Map)?;

        let rescalings = self
            .rescalings
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if !target.contains(&r.symbol) {
                    return Err(CatalogError::Expr {
                        field: format!("rescalings[{i}].symbol"),
                        source: PhaseSpaceError::UnknownIdentifier { name: r.symbol.clone(), pos: 0 },
                    });
                }
                Ok(Rescaling {
                    symbol: r.symbol.clone(),
                    replacement: parse_field(&target, format!("rescalings[{i}].expr"), &r.expr)?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut param_values = BTreeMap::new();
        for (name, value) in &self.params {
            if let Some(v) = value {
                param_values.insert(name.clone(), parse_field(&space, format!("params.{name}"), v)?);
            }
        }
        let e = &self.expected;
        let expected = ExpectedExprs {
            kstar: parse_opt(&target, "kstar", &e.kstar)?,
            chi_phi_bracket: parse_opt(&space, "chi_phi_bracket", &e.chi_phi_bracket)?,
            phi: parse_opt(&space, "phi", &e.phi)?,
            k: parse_opt(&target, "k", &e.k)?,
            q1_star: parse_opt(&target, "q1_star", &e.q1_star)?,
            phi_surface: parse_opt(&target, "phi_surface", &e.phi_surface)?,
            emergent: parse_opt(&target, "emergent", &e.emergent)?,
        };
        Ok(CompiledSystem {
            spec: self.clone(),
            sys,
            charges,
            chi,
            map,
            target,
            rescalings,
            param_values,
            expected,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        serde_json::from_str(text).map_err(|e| CatalogError::Schema {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })
    }
}

impl CompiledSystem {
    /// Run dirac → gauge → reduce.
    pub fn run(&self) -> Result<PipelineResult, CatalogError> {
        let sys = &self.sys;
        let primary = sys.primary_constraints()?;
        let multipliers = solve_multipliers(sys, &primary)?;
        let charges = verify_charges(sys, &self.charges)?;
        charges.ensure()?;
        let split = build_h_split(sys, &self.charges)?;
        let info = information_loss_constraint(sys, &self.charges)?;
        let gauge = validate_gauge(sys, &info, &self.chi).map_err(CatalogError::Map)?;
        let reduced = reduce(sys, &info, &self.chi, &self.map).map_err(CatalogError::Map)?;
        Ok(PipelineResult { multipliers, charges, split, info, gauge, reduced })
    }
}

/// Read, parse and validate a spec file.
pub fn load_spec(path: &Path) -> Result<SystemSpec, CatalogError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CatalogError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    let spec = SystemSpec::from_json(&text)?;
    spec.compile()?;
    Ok(spec)
}

pub fn save_spec(spec: &SystemSpec, path: &Path) -> Result<(), CatalogError> {
    std::fs::write(path, spec.to_json() + "\n")
        .map_err(|e| CatalogError::Io { path: path.display().to_string(), msg: e.to_string() })
}

/// Resolve a builtin name or a spec path.
pub fn resolve(name_or_path: &str) -> Result<SystemSpec, CatalogError> {
    if BUILTIN_NAMES.contains(&name_or_path) {
        return builtin(name_or_path);
    }
    let stem = name_or_path.strip_suffix(".json").unwrap_or(name_or_path);
    let path = Path::new(name_or_path);
    if !path.exists() && BUILTIN_NAMES.contains(&stem) {
        return builtin(stem);
    }
    load_spec(path)
}

struct Draft<'a> {
    name: &'a str,
    coordinates: &'a [&'a str],
    f: &'a [&'a str],
    charges: &'a [(&'a str, &'a str)],
    gauge: &'a str,
    rows: &'a [(&'a str, &'a str)],
    /// Parameters with an optional numeric binding used by the numeric stages.
    params: &'a [(&'a str, Option<&'a str>)],
    rescalings: &'a [(&'a str, &'a str, &'a str)],
    expected: Expected,
}

fn build(d: Draft<'_>) -> SystemSpec {
    let params: BTreeMap<String, Option<String>> =
        d.params.iter().map(|(p, v)| (p.to_string(), v.map(str::to_string))).collect();
    let names: Vec<String> = params.keys().cloned().collect();
    let space = PhaseSpace::doubled(d.coordinates, &names.iter().map(String::as_str).collect::<Vec<_>>())
        .expect("builtin space");
    let labels: Vec<String> = d.rows.iter().map(|(l, _)| l.to_string()).collect();
    let rows: Vec<SymExpr> = d.rows.iter().map(|(_, e)| space.parse(e).expect("builtin row")).collect();
    let map = CanonicalMap::from_rows(&space, labels.clone(), &rows).expect("builtin map");
    let s = |v: &str| v.to_string();
    SystemSpec {
        name: s(d.name),
        coordinates: d.coordinates.iter().map(|c| s(c)).collect(),
        f: d.f.iter().map(|c| s(c)).collect(),
        charges: d.charges.iter().map(|(e, c)| ChargeEntry { expr: s(e), coeff: s(c) }).collect(),
        gauge: s(d.gauge),
        map: MapSpec {
            labels,
            matrix: map.matrix.iter().map(|r| r.iter().map(SymExpr::to_string).collect()).collect(),
            offset: map.offset.iter().map(SymExpr::to_string).collect(),
        },
        params,
        rescalings: d
            .rescalings
            .iter()
            .map(|(sym, e, note)| RescalingSpec { symbol: s(sym), expr: s(e), note: Some(s(note)) })
            .collect(),
        expected: d.expected,
    }
}

/// The three worked systems.
pub fn builtin(name: &str) -> Result<SystemSpec, CatalogError> {
    let some = |s: &str| Some(s.to_string());
    let spec = match name {
        "pendulum-free" => build(Draft {
            name,
            coordinates: &["x", "y"],
            f: &["-y", "x"],
            charges: &[("x^2 + y^2", "a1")],
            gauge: "pb_y - y",
            rows: &[
                ("Q1", "p_y"),
                ("P1", "pb_y - y"),
                ("Q2", "pb_x"),
                ("P2", "p_x - qb_x"),
                ("Q3", "pb_y"),
                ("P3", "p_y - qb_y"),
                ("Qbar", "p_x"),
                ("Pbar", "pb_x - x"),
            ],
            params: &[("a1", None), ("m", Some("1")), ("hbar", Some("1"))],
            rescalings: &[
                ("a1", "1/(2*m*hbar)", "scale of the charge fixes the mass"),
                ("Qbar", "Qbar/hbar", "coordinate rescaling producing the quantum measure"),
            ],
            expected: Expected {
                kstar: some("a1*Pbar^2"),
                chi_phi_bracket: some("pb_x - x"),
                phi: some("x*p_y - y*p_x - a1*x^2 - a1*y^2 - pb_x*qb_y + 2*a1*pb_x*x + pb_y*qb_x + 2*a1*pb_y*y"),
                k: some("-Pbar*Q1"),
                q1_star: some("-a1*Pbar"),
                phi_surface: None,
                emergent: some("Pbar^2/(2*m*hbar)"),
            },
        }),
        "pendulum-oscillator" => build(Draft {
            name,
            coordinates: &["x", "y"],
            f: &["-y", "x"],
            charges: &[("x^2 + y^2 + d^2*(qb_x^2 + qb_y^2)", "-1/(2*d)")],
            gauge: "pb_y + d*p_x - y",
            rows: &[
                ("Q1", "p_y"),
                ("P1", "pb_y + d*p_x - y"),
                ("Q2", "pb_x"),
                ("P2", "p_x - qb_x"),
                ("Q3", "pb_y"),
                ("P3", "p_y - qb_y"),
                ("Qbar", "p_x"),
                ("Pbar", "pb_x + d*p_y - x"),
            ],
            params: &[("d", None), ("m", Some("1")), ("hbar", Some("1"))],
            rescalings: &[
                ("d", "-m*hbar/2", "unit-frequency choice"),
                ("Qbar", "Qbar/hbar", "coordinate rescaling producing the quantum measure"),
            ],
            expected: Expected {
                kstar: some("-Pbar^2/(4*d) - d*Qbar^2"),
                chi_phi_bracket: some("2*pb_x - 2*x - 2*d*p_y"),
                phi: some(
                    "x*p_y - y*p_x + x^2/(2*d) + y^2/(2*d) - d/2*qb_x^2 - d/2*qb_y^2 - qb_y*pb_x + qb_x*pb_y \
                     - x*pb_x/d - y*pb_y/d + d*qb_x*p_x + d*qb_y*p_y",
                ),
                k: some("-Pbar*Q1 + d*Q1^2 - d*Qbar^2"),
                q1_star: some("Pbar/(2*d)"),
                phi_surface: None,
                emergent: some("Pbar^2/(2*m*hbar) + m*Qbar^2/(2*hbar)"),
            },
        }),
        "roessler-duffing" => build(Draft {
            name,
            coordinates: &["x", "y", "z"],
            f: &["-y - z", "x", "x*z"],
            charges: &[("(x^2 + y^2 + 2*z)^2", "a1"), ("z^2*exp(-2*y)", "a2")],
            // `pb_x - y` does not commute with p_x - qb_x and p_y - qb_y; this
            // choice coincides with it once pb = 0 and keeps the map canonical
            gauge: "pb_y - y",
            rows: &[
                ("Q1", "p_y"),
                ("P1", "pb_y - y"),
                ("Q2", "pb_x"),
                ("P2", "p_x - qb_x"),
                ("Q3", "pb_y"),
                ("P3", "p_y - qb_y"),
                ("Q4", "pb_z"),
                ("P4", "p_z - qb_z"),
                ("Qbar1", "(2*d*p_z - pb_x/c + x/c)/sqrt(2)"),
                ("Pbar1", "(pb_z/d - z/d)/sqrt(2)"),
                ("Qbar2", "(x/c - pb_x/c)/sqrt(2)"),
                ("Pbar2", "(2*c*p_x - pb_z/d + z/d)/sqrt(2)"),
            ],
            params: &[("a1", None), ("a2", None), ("c", None), ("d", None), ("m1", Some("1")), ("m2", Some("1"))],
            rescalings: &[],
            expected: Expected {
                kstar: some(
                    "2*d^2*(4*a1 + a2)*Pbar1^2 - 8*sqrt(2)*a1*d*c^2*Pbar1*Qbar2^2 + 4*a1*c^4*Qbar2^4",
                ),
                chi_phi_bracket: some("pb_x - x"),
                phi: some(
                    "-p_x*(y + z) + p_y*x + p_z*x*z - a1*(x^2 + y^2 + 2*z)^2 - a2*z^2*exp(-2*y) \
                     - pb_x*(qb_y + qb_z*z - 4*a1*x*(x^2 + y^2 + 2*z)) \
                     + pb_y*(qb_x + 4*a1*y*(x^2 + y^2 + 2*z) - 2*a2*z^2*exp(-2*y)) \
                     + pb_z*(qb_x - qb_z*x + 4*a1*(x^2 + y^2 + 2*z) + 2*a2*z*exp(-2*y))",
                ),
                k: None,
                q1_star: None,
                phi_surface: some(
                    "sqrt(2)*c*Q1*Qbar2 - sqrt(2)*c*(Qbar1 - Qbar2)*Qbar2*Pbar1 + d/c*(Pbar1 + Pbar2)*Pbar1 \
                     - 2*d^2*(4*a1 + a2)*Pbar1^2 + 8*sqrt(2)*a1*d*c^2*Pbar1*Qbar2^2 - 4*a1*c^4*Qbar2^4",
                ),
                emergent: None,
            },
        }),
        other => return Err(CatalogError::UnknownBuiltin(other.to_string())),
    };
    Ok(spec)
}
