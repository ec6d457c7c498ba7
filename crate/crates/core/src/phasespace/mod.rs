//! Exact symbolic algebra over phase-space functions.
//!
//! A [`PhaseSpace`] is a registry of canonical pairs plus inert parameters;
//! a [`SymExpr`] is a finite sum of `coefficient × monomial × exp(linear form)`
//! terms with coefficients in Q(√2). The class is closed under addition,
//! multiplication, differentiation and therefore under Poisson brackets, and
//! zero-testing is exact.

mod coeff;
mod expr;
mod parse;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

pub use coeff::Coeff;
pub use expr::{EvalRing, SymExpr, TermKey};
pub use parse::parse_expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhaseSpaceError {
    #[error("unknown identifier `{name}` at offset {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent at offset {pos} must be an integer literal")]
    NonIntegerExponent { pos: usize },
    #[error("argument of exp(...) at offset {pos} is not a linear form with rational weights")]
    NonLinearExp { pos: usize },
    #[error("division at offset {pos} is only allowed by a nonzero constant or parameter monomial")]
    BadDivisor { pos: usize },
    #[error("sqrt(...) at offset {pos} needs a nonnegative rational r with r or r/2 a perfect square")]
    BadSqrt { pos: usize },
    #[error("symbol `{0}` is not bound")]
    Unbound(String),
    #[error("binding for `{0}` is not invertible")]
    NonInvertible(String),
    #[error("cannot substitute `{1}` for `{0}` inside an exponential (needs a linear form)")]
    NonAffineExponent(String, String),
    #[error("expression `{0}` has exponential factors and cannot be evaluated in this ring")]
    Transcendental(String),
    #[error("coefficient `{0}` is not representable in the target ring")]
    Unrepresentable(String),
    #[error("symbol `{0}` does not belong to this phase space")]
    MismatchedSpace(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
}

/// Role of a declared symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// Position of the canonical pair with this index.
    Position(usize),
    /// Momentum of the canonical pair with this index.
    Momentum(usize),
    Param,
}

/// Registry of canonical pairs and parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpace {
    coords: Vec<String>,
    pairs: Vec<(String, String)>,
    params: Vec<String>,
    kinds: HashMap<String, SymbolKind>,
}

/// Conventional name of the momentum conjugate to `coord`.
pub fn momentum(coord: &str) -> String {
    format!("p_{coord}")
}

/// Conventional name of the auxiliary coordinate paired with `coord`.
pub fn aux(coord: &str) -> String {
    format!("qb_{coord}")
}

/// Conventional name of the momentum conjugate to [`aux`]`(coord)`.
pub fn aux_momentum(coord: &str) -> String {
    format!("pb_{coord}")
}

impl PhaseSpace {
    /// The doubled space: for every coordinate `c` the pairs `(c, p_c)` and
    /// `(qb_c, pb_c)`. Pairs are ordered as all `(q, p)` first, then all
    /// `(q̄, p̄)`.
    pub fn doubled<S: AsRef<str>>(coords: &[S], params: &[S]) -> Result<Self, PhaseSpaceError> {
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        let mut pairs: Vec<(String, String)> = coords.iter().map(|c| (c.clone(), momentum(c))).collect();
        pairs.extend(coords.iter().map(|c| (aux(c), aux_momentum(c))));
        let mut space = Self::from_pairs(pairs, params)?;
        space.coords = coords;
        Ok(space)
    }

    /// A space with explicitly named canonical pairs `(position, momentum)`.
    pub fn from_pairs<S: AsRef<str>>(pairs: Vec<(String, String)>, params: &[S]) -> Result<Self, PhaseSpaceError> {
        let mut kinds = HashMap::new();
        let mut claim = |name: &str, kind: SymbolKind| -> Result<(), PhaseSpaceError> {
            if kinds.insert(name.to_string(), kind).is_some() {
                return Err(PhaseSpaceError::DuplicateSymbol(name.to_string()));
            }
            Ok(())
        };
        for (i, (q, p)) in pairs.iter().enumerate() {
            claim(q, SymbolKind::Position(i))?;
            claim(p, SymbolKind::Momentum(i))?;
        }
        let params: Vec<String> = params.iter().map(|p| p.as_ref().to_string()).collect();
        for p in &params {
            claim(p, SymbolKind::Param)?;
        }
        Ok(Self { coords: Vec::new(), pairs, params, kinds })
    }

    /// Original coordinate names of a doubled space (empty otherwise).
    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.kinds.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.kinds.contains_key(name)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.kind(name) == Some(SymbolKind::Param)
    }

    /// Same pairs, extended parameter list.
    pub fn with_params<S: AsRef<str>>(&self, extra: &[S]) -> Result<Self, PhaseSpaceError> {
        let mut params = self.params.clone();
        params.extend(extra.iter().map(|s| s.as_ref().to_string()));
        let mut out = Self::from_pairs(self.pairs.clone(), &params)?;
        out.coords = self.coords.clone();
        Ok(out)
    }

    /// Errors when `e` mentions a symbol that is not declared here.
    pub fn check_member(&self, e: &SymExpr) -> Result<(), PhaseSpaceError> {
        match e.symbols().into_iter().find(|s| !self.contains(s)) {
            Some(s) => Err(PhaseSpaceError::MismatchedSpace(s)),
            None => Ok(()),
        }
    }

    /// `{A, B} = Σ (∂A/∂q ∂B/∂p − ∂A/∂p ∂B/∂q)` over every canonical pair.
    pub fn poisson_bracket(&self, a: &SymExpr, b: &SymExpr) -> Result<SymExpr, PhaseSpaceError> {
        self.check_member(a)?;
        self.check_member(b)?;
        let mut out = SymExpr::zero();
        for (q, p) in &self.pairs {
            let (aq, bp) = (a.differentiate(q), b.differentiate(p));
            if !aq.is_zero() && !bp.is_zero() {
                out += &(&aq * &bp);
            }
            let (ap, bq) = (a.differentiate(p), b.differentiate(q));
            if !ap.is_zero() && !bq.is_zero() {
                out -= &(&ap * &bq);
            }
        }
        Ok(out)
    }

    pub fn parse(&self, text: &str) -> Result<SymExpr, PhaseSpaceError> {
        parse_expr(text, self)
    }

    /// Convenience: substitution map from `(name, expr)` pairs.
    pub fn bindings<I, S>(items: I) -> BTreeMap<String, SymExpr>
    where
        I: IntoIterator<Item = (S, SymExpr)>,
        S: Into<String>,
    {
        items.into_iter().map(|(k, v)| (k.into(), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pendulum() -> PhaseSpace {
        PhaseSpace::doubled(&["x", "y"], &["a1"]).unwrap()
    }

    #[test]
    fn doubled_naming_and_order() {
        let s = pendulum();
        let names: Vec<_> = s.pairs().iter().map(|(q, _)| q.as_str()).collect();
        assert_eq!(names, ["x", "y", "qb_x", "qb_y"]);
        assert_eq!(s.kind("pb_y"), Some(SymbolKind::Momentum(3)));
        assert!(s.is_param("a1"));
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(matches!(
            PhaseSpace::doubled(&["x", "x"], &[]),
            Err(PhaseSpaceError::DuplicateSymbol(_))
        ));
        assert!(PhaseSpace::doubled(&["x"], &["p_x"]).is_err());
    }

    #[test]
    fn canonical_brackets() {
        let s = pendulum();
        let b = |a: &str, c: &str| s.poisson_bracket(&s.parse(a).unwrap(), &s.parse(c).unwrap()).unwrap();
        assert_eq!(b("x", "p_x"), SymExpr::one());
        assert!(b("p_x - qb_x", "pb_y").is_zero());
        assert_eq!(b("p_x - qb_x", "pb_x"), SymExpr::int(-1));
        assert!(b("x*p_y - y*p_x", "x^2 + y^2").is_zero());
        assert!(b("a1*x", "p_x").as_constant().is_none());
    }

    #[test]
    fn bracket_rejects_foreign_symbols() {
        let s = pendulum();
        let other = SymExpr::symbol("w");
        assert!(matches!(
            s.poisson_bracket(&other, &SymExpr::symbol("x")),
            Err(PhaseSpaceError::MismatchedSpace(_))
        ));
    }
}
