//! JSON problem documents for the pencil family
//! `min f(x) + w ||x||_1  s.t.  -A_0 - sum_i x_i A_i in K`.
//!
//! ```json
//! {
//!   "family": "psd",          // "orthant" | "psd" | "pcone"
//!   "n": 2, "m": 2,
//!   "p": 2.0,                 // pcone only
//!   "Q": [..],                // n*n, row-major, symmetric
//!   "b": [..], "c": [..], "d": [..],   // c and d may be omitted (zeros)
//!   "A": [[..], ..],          // n+1 elements of Y
//!   "l1_weight": 1.0,
//!   "alpha4": 1e-5,           // optional
//!   "x0": [..],               // optional, defaults to zero
//!   "seed": 7                 // optional, informational
//! }
//! ```
//!
//! Elements of `Y` are `m` numbers for the orthant, `m*m` (row-major) for the
//! semidefinite family and `m+1` (last entry the epigraph coordinate) for the
//! p-cone.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use smba_core::cone::ConeBaseOracle;
use smba_core::problem::instances::pencil_problem;
use smba_core::problem::{DCProblem, PolyObjective};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Orthant,
    Psd,
    Pcone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub d: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(default)]
    pub l1_weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha4: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses and validates; `path` is only used in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| AppError::json(path, e))?;
        file.validate(path)?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| AppError::json(path, e))?;
        fs::write(path, text + "\n").map_err(|e| AppError::io(path, e))
    }

    /// Length of one flattened element of `Y`.
    pub fn y_dim(&self) -> usize {
        match self.family {
            Family::Orthant => self.m,
            Family::Psd => self.m * self.m,
            Family::Pcone => self.m + 1,
        }
    }

    pub fn validate(&self, path: &Path) -> Result<()> {
        let (n, m) = (self.n, self.m);
        let bad = |field: &str, msg: String| Err(AppError::field(path, field, msg));
        if n == 0 {
            return bad("n", "must be positive".into());
        }
        if m == 0 {
            return bad("m", "must be positive".into());
        }
        let lens = [
            ("Q", self.q.len(), n * n),
            ("b", self.b.len(), n),
        ];
        for (field, got, want) in lens {
            if got != want {
                return bad(field, format!("expected {want} numbers, got {got}"));
            }
        }
        for (field, v) in [("c", &self.c), ("d", &self.d)] {
            if !v.is_empty() && v.len() != n {
                return bad(field, format!("expected {n} numbers or none, got {}", v.len()));
            }
            if v.iter().any(|x| *x < 0.0) {
                return bad(field, "entries must be nonnegative".into());
            }
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != n {
                return bad("x0", format!("expected {n} numbers, got {}", x0.len()));
            }
        }
        if self.a.len() != n + 1 {
            return bad("A", format!("expected n + 1 = {} elements, got {}", n + 1, self.a.len()));
        }
        let dim = self.y_dim();
        for (i, ai) in self.a.iter().enumerate() {
            if ai.len() != dim {
                return bad(&format!("A[{i}]"), format!("expected {dim} numbers, got {}", ai.len()));
            }
        }
        match (self.family, self.p) {
            (Family::Pcone, None) => return bad("p", "required for the pcone family".into()),
            (Family::Pcone, Some(p)) if !(p > 1.0) => {
                return bad("p", format!("must exceed 1, got {p}"))
            }
            (Family::Orthant | Family::Psd, Some(_)) => {
                return bad("p", "only meaningful for the pcone family".into())
            }
            _ => {}
        }
        if !(self.l1_weight >= 0.0) {
            return bad("l1_weight", "must be nonnegative".into());
        }
        let finite = self.q.iter().chain(&self.b).chain(&self.c).chain(&self.d).chain(self.a.iter().flatten());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(AppError::Invalid(format!("{}: non-finite number in problem data", path.display())));
        }
        Ok(())
    }

    fn or_zeros(v: &[f64], n: usize) -> DVector<f64> {
        if v.is_empty() {
            DVector::zeros(n)
        } else {
            DVector::from_column_slice(v)
        }
    }

    pub fn to_problem(&self) -> Result<DCProblem> {
        let n = self.n;
        let f = PolyObjective::new(
            DMatrix::from_row_slice(n, n, &self.q),
            DVector::from_column_slice(&self.b),
            Self::or_zeros(&self.c, n),
            Self::or_zeros(&self.d, n),
        )?;
        let mut cone = match self.family {
            Family::Orthant => ConeBaseOracle::nonpos_orthant(self.m)?,
            Family::Psd => ConeBaseOracle::neg_semidef(self.m)?,
            Family::Pcone => ConeBaseOracle::p_cone(self.m, self.p.unwrap_or(2.0))?,
        };
        if let Some(alpha4) = self.alpha4 {
            cone = cone.with_alpha4(alpha4)?;
        }
        let m = self.m;
        let pencil: Vec<DVector<f64>> = self
            .a
            .iter()
            .map(|ai| match self.family {
                // internal storage is column-major
                Family::Psd => DVector::from_column_slice(DMatrix::from_row_slice(m, m, ai).as_slice()),
                _ => DVector::from_column_slice(ai),
            })
            .collect();
        Ok(pencil_problem(f, self.l1_weight, &pencil, cone)?)
    }

    pub fn initial_point(&self) -> DVector<f64> {
        match &self.x0 {
            Some(x0) => DVector::from_column_slice(x0),
            None => DVector::zeros(self.n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{
        "family": "orthant", "n": 1, "m": 2,
        "Q": [1.0], "b": [-2.0],
        "A": [[1.0, 2.0], [-1.0, 0.0]]
    }"#;

    #[test]
    fn parses_minimal_document() {
        let f = ProblemFile::parse(TINY, Path::new("tiny.json")).unwrap();
        assert_eq!(f.family, Family::Orthant);
        assert_eq!(f.l1_weight, 0.0);
        let prob = f.to_problem().unwrap();
        // G(x) = (-1 + x, -2) <= 0 iff x <= 1
        let g = prob.constraint_value(&DVector::from_column_slice(&[0.5])).unwrap();
        assert_eq!(g.as_slice(), &[-0.5, -2.0]);
    }

    #[test]
    fn field_errors_name_the_field() {
        let bad = TINY.replace("\"b\": [-2.0]", "\"b\": [-2.0, 1.0]");
        let err = ProblemFile::parse(&bad, Path::new("p.json")).unwrap_err();
        assert!(err.to_string().contains("field `b`"), "{err}");

        let bad = TINY.replace("[-1.0, 0.0]", "[-1.0]");
        let err = ProblemFile::parse(&bad, Path::new("p.json")).unwrap_err();
        assert!(err.to_string().contains("A[1]"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = ProblemFile::parse("{\n  \"family\": ", Path::new("p.json")).unwrap_err();
        assert!(matches!(err, AppError::Parse { line: 2, .. }), "{err}");
        let err = ProblemFile::parse(&TINY.replace("\"m\"", "\"mm\""), Path::new("p.json")).unwrap_err();
        assert!(err.to_string().contains("mm"), "{err}");
    }
}
