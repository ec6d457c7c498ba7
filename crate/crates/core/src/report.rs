//! Machine-readable verification records.

use std::time::Instant;

use serde::Serialize;

use crate::phasespace::SymExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

/// One verified (or merely reported) claim.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub status: Status,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    pub residual: Option<String>,
    pub tolerance: Option<f64>,
    /// Wall-clock time; only recorded on request so that reports stay
    /// reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl Check {
    fn new(id: impl Into<String>, description: impl Into<String>, status: Status) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            status,
            lhs: None,
            rhs: None,
            residual: None,
            tolerance: None,
            runtime_ms: None,
        }
    }

    /// Exact symbolic equality; the residual is `lhs − rhs`.
    pub fn exact(id: impl Into<String>, description: impl Into<String>, lhs: &SymExpr, rhs: &SymExpr) -> Self {
        let residual = lhs - rhs;
        let mut c = Self::new(id, description, if residual.is_zero() { Status::Pass } else { Status::Fail });
        c.lhs = Some(lhs.to_string());
        c.rhs = Some(rhs.to_string());
        c.residual = Some(residual.to_string());
        c
    }

    /// An expression that must vanish identically.
    pub fn vanishes(id: impl Into<String>, description: impl Into<String>, residual: &SymExpr) -> Self {
        Self::exact(id, description, residual, &SymExpr::zero())
    }

    /// `|residual| ≤ tolerance`.
    pub fn numeric(
        id: impl Into<String>,
        description: impl Into<String>,
        lhs: f64,
        rhs: f64,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        let ok = residual.is_finite() && residual.abs() <= tolerance;
        let mut c = Self::new(id, description, if ok { Status::Pass } else { Status::Fail });
        c.lhs = Some(format!("{lhs:e}"));
        c.rhs = Some(format!("{rhs:e}"));
        c.residual = Some(format!("{residual:e}"));
        c.tolerance = Some(tolerance);
        c
    }

    /// A yes/no property with a free-form detail.
    pub fn flag(id: impl Into<String>, description: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let mut c = Self::new(id, description, if ok { Status::Pass } else { Status::Fail });
        c.lhs = Some(detail.into());
        c
    }

    pub fn info(id: impl Into<String>, description: impl Into<String>, value: impl Into<String>) -> Self {
        let mut c = Self::new(id, description, Status::Info);
        c.lhs = Some(value.into());
        c
    }

    /// A stage that could not run.
    pub fn error(id: impl Into<String>, description: impl Into<String>, err: impl ToString) -> Self {
        let mut c = Self::new(id, description, Status::Fail);
        c.residual = Some(err.to_string());
        c
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Checks for one system, in a deterministic order.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub system: String,
    pub overall: Status,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(system: impl Into<String>, checks: Vec<Check>) -> Self {
        let overall = if checks.iter().all(Check::passed) { Status::Pass } else { Status::Fail };
        Self { system: system.into(), overall, checks }
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    /// One line per check for human readers.
    pub fn summary(&self) -> String {
        let mut out = format!("{}: {}\n", self.system, if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Info => "info",
            };
            out.push_str(&format!("  [{tag}] {} — {}", c.id, c.description));
            if c.status == Status::Fail {
                if let Some(r) = &c.residual {
                    out.push_str(&format!(" (residual: {r})"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Several reports with a combined status.
#[derive(Clone, Debug, Serialize)]
pub struct ReportSet {
    pub overall: Status,
    pub reports: Vec<Report>,
}

impl ReportSet {
    pub fn new(reports: Vec<Report>) -> Self {
        let overall = if reports.iter().all(Report::passed) { Status::Pass } else { Status::Fail };
        Self { overall, reports }
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }
}

/// Runs check-producing closures, optionally timing each.
#[derive(Clone, Copy, Debug, Default)]
pub struct Recorder {
    pub timings: bool,
}

impl Recorder {
    pub fn time(&self, f: impl FnOnce() -> Vec<Check>) -> Vec<Check> {
        let start = Instant::now();
        let mut checks = f();
        if self.timings {
            let ms = start.elapsed().as_secs_f64() * 1e3;
            for c in &mut checks {
                c.runtime_ms = Some(ms);
            }
        }
        checks
    }
}
