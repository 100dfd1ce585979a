//! Support functions of compact bases of polar cones and their majorizing
//! smoothing approximations (MSAs).
//!
//! Three cone families are supported:
//!
//! | family            | `Y`          | `sigma_B(y)`                 | smoothing `h_mu(y)`                      |
//! |-------------------|--------------|------------------------------|------------------------------------------|
//! | `NonposOrthant(m)`| `R^m`        | `max_i y_i`                  | `mu log sum exp(y_i / mu)`               |
//! | `NegSemidef(m)`   | `S^m`        | `lambda_max(y)`              | `mu log sum exp(lambda_i(y) / mu)`       |
//! | `PCone(m, p)`     | `R^(m+1)`    | `||y_1:m||_p - y_(m+1)`      | `sqrt(||y_1:m||^2 + mu^2) - y_(m+1)`, p=2 |
//!
//! Every smoothing carries an additive shift `alpha4 * mu` which makes the
//! family strictly decreasing as `mu` decreases. Elements of `S^m` are stored
//! as flattened `m * m` vectors (column-major; symmetric inputs make the
//! storage order irrelevant).

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_dim, check_finite, Error, Result};

/// Smallest smoothing parameter the kernels accept; smaller values are clamped.
pub const MU_FLOOR: f64 = 1e-12;

/// Default additive shift slope.
pub const DEFAULT_ALPHA4: f64 = 1e-5;

/// Frobenius-relative asymmetry accepted (and repaired) for `S^m` inputs.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Parameters `(alpha1, alpha2, alpha3, alpha4)` and `M_B` of an MSA.
///
/// `alpha3` is reported after the shift, i.e. it already includes `alpha4`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoothingCert {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub base_norm_bound: f64,
}

impl SmoothingCert {
    /// Lipschitz constant of `grad h_mu`.
    pub fn gradient_lipschitz(&self, mu: f64) -> f64 {
        self.alpha1 + self.alpha2 / mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConeFamily {
    /// `K = R^m_-`, base `{u >= 0, sum u = 1}`.
    NonposOrthant { m: usize },
    /// `K = S^m_-`, base `{u PSD, tr u = 1}`.
    NegSemidef { m: usize },
    /// `K = {(u, t) : ||u||_p <= t}`, base `{(u, -1) : ||u||_q <= 1}`.
    PCone { m: usize, p: f64 },
}

impl ConeFamily {
    /// Length of a flattened element of `Y`.
    pub fn dim(&self) -> usize {
        match *self {
            ConeFamily::NonposOrthant { m } => m,
            ConeFamily::NegSemidef { m } => m * m,
            ConeFamily::PCone { m, .. } => m + 1,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ConeFamily::NonposOrthant { .. } => "nonpositive orthant",
            ConeFamily::NegSemidef { .. } => "negative semidefinite cone",
            ConeFamily::PCone { .. } => "p-cone",
        }
    }
}

/// Oracle for `sigma_B`, `h_mu` and `grad h_mu` of one cone family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConeBaseOracle {
    family: ConeFamily,
    alpha4: f64,
}

impl ConeBaseOracle {
    pub fn new(family: ConeFamily) -> Result<Self> {
        let m = match family {
            ConeFamily::NonposOrthant { m } | ConeFamily::NegSemidef { m } => m,
            ConeFamily::PCone { m, p } => {
                if !(p > 1.0) || !p.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "p-cone exponent must lie in (1, inf), got {p}"
                    )));
                }
                m
            }
        };
        if m == 0 {
            return Err(Error::InvalidArgument(format!(
                "{} dimension must be positive",
                family.name()
            )));
        }
        Ok(Self {
            family,
            alpha4: DEFAULT_ALPHA4,
        })
    }

    pub fn nonpos_orthant(m: usize) -> Result<Self> {
        Self::new(ConeFamily::NonposOrthant { m })
    }

    pub fn neg_semidef(m: usize) -> Result<Self> {
        Self::new(ConeFamily::NegSemidef { m })
    }

    pub fn p_cone(m: usize, p: f64) -> Result<Self> {
        Self::new(ConeFamily::PCone { m, p })
    }

    /// Replaces the additive shift slope (`0` disables the shift).
    pub fn with_alpha4(mut self, alpha4: f64) -> Result<Self> {
        if !(alpha4 >= 0.0) || !alpha4.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha4 must be finite and nonnegative, got {alpha4}"
            )));
        }
        self.alpha4 = alpha4;
        Ok(self)
    }

    pub fn family(&self) -> ConeFamily {
        self.family
    }

    pub fn alpha4(&self) -> f64 {
        self.alpha4
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Whether `msa_value`/`msa_gradient` are available for this family.
    pub fn has_smoothing(&self) -> bool {
        match self.family {
            ConeFamily::PCone { p, .. } => p == 2.0,
            _ => true,
        }
    }

    pub fn cert(&self) -> SmoothingCert {
        let (alpha3, base_norm_bound) = match self.family {
            ConeFamily::NonposOrthant { m } | ConeFamily::NegSemidef { m } => {
                ((m as f64).ln(), 1.0)
            }
            ConeFamily::PCone { m, p } => {
                // sup ||u||_2 over ||u||_q <= 1
                let q = p / (p - 1.0);
                let u_bound = if q <= 2.0 {
                    1.0
                } else {
                    (m as f64).powf(0.5 - 1.0 / q)
                };
                (1.0, (1.0 + u_bound * u_bound).sqrt())
            }
        };
        SmoothingCert {
            alpha1: 0.0,
            alpha2: 1.0,
            alpha3: alpha3 + self.alpha4,
            alpha4: self.alpha4,
            base_norm_bound,
        }
    }

    /// Validates `y` and performs the per-point work shared by every query
    /// (the eigendecomposition for the semidefinite family).
    pub fn evaluate(&self, y: &DVector<f64>) -> Result<ConePoint> {
        check_dim("cone element", self.dim(), y.len())?;
        check_finite("cone element", y.as_slice())?;
        let kind = match self.family {
            ConeFamily::NonposOrthant { .. } => PointKind::Orthant,
            ConeFamily::NegSemidef { m } => {
                let (values, vectors) = sorted_eigen(&symmetrize(m, y)?)?;
                PointKind::Spectral { values, vectors }
            }
            ConeFamily::PCone { m, p } => {
                let head = y.rows(0, m);
                let sq: f64 = head.iter().map(|v| v * v).sum();
                let p_norm = if p == 2.0 {
                    sq.sqrt()
                } else {
                    head.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
                };
                PointKind::PCone {
                    sq_norm: sq,
                    p_norm,
                    smoothable: p == 2.0,
                }
            }
        };
        Ok(ConePoint {
            y: y.clone(),
            alpha4: self.alpha4,
            kind,
        })
    }

    /// `sigma_B(y)`; `y` lies in `K` iff the result is `<= 0`.
    pub fn support_value(&self, y: &DVector<f64>) -> Result<f64> {
        Ok(self.evaluate(y)?.support())
    }

    /// `h_mu(y) = hbar_mu(y) + alpha4 * mu`.
    pub fn msa_value(&self, y: &DVector<f64>, mu: f64) -> Result<f64> {
        self.evaluate(y)?.msa_value(mu)
    }

    pub fn msa_gradient(&self, y: &DVector<f64>, mu: f64) -> Result<DVector<f64>> {
        self.evaluate(y)?.msa_gradient(mu)
    }

    /// Distance-like violation of `v in K°` (zero when `v` is in the polar cone).
    pub fn polar_violation(&self, v: &DVector<f64>) -> Result<f64> {
        check_dim("polar element", self.dim(), v.len())?;
        check_finite("polar element", v.as_slice())?;
        Ok(match self.family {
            ConeFamily::NonposOrthant { .. } => (-v.min()).max(0.0),
            ConeFamily::NegSemidef { m } => {
                let (values, _) = sorted_eigen(&symmetrize(m, v)?)?;
                (-values[m - 1]).max(0.0)
            }
            ConeFamily::PCone { m, p } => {
                let q = p / (p - 1.0);
                let head = v
                    .rows(0, m)
                    .iter()
                    .map(|x| x.abs().powf(q))
                    .sum::<f64>()
                    .powf(1.0 / q);
                (head + v[m]).max(0.0)
            }
        })
    }
}

#[derive(Debug, Clone)]
enum PointKind {
    Orthant,
    Spectral {
        /// Sorted descending.
        values: DVector<f64>,
        vectors: DMatrix<f64>,
    },
    PCone {
        sq_norm: f64,
        p_norm: f64,
        smoothable: bool,
    },
}

/// A validated element of `Y` with its cached decomposition.
#[derive(Debug, Clone)]
pub struct ConePoint {
    y: DVector<f64>,
    alpha4: f64,
    kind: PointKind,
}

impl ConePoint {
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Eigenvalues (descending) for the semidefinite family.
    pub fn eigenvalues(&self) -> Option<&DVector<f64>> {
        match &self.kind {
            PointKind::Spectral { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn support(&self) -> f64 {
        match &self.kind {
            PointKind::Orthant => self.y.max(),
            PointKind::Spectral { values, .. } => values[0],
            PointKind::PCone { p_norm, .. } => p_norm - self.y[self.y.len() - 1],
        }
    }

    pub fn msa_value(&self, mu: f64) -> Result<f64> {
        let mu = effective_mu(mu)?;
        let base = match &self.kind {
            PointKind::Orthant => logsumexp_value(self.y.as_slice(), mu),
            PointKind::Spectral { values, .. } => logsumexp_value(values.as_slice(), mu),
            PointKind::PCone {
                sq_norm,
                smoothable,
                ..
            } => {
                require_smoothable(*smoothable)?;
                (sq_norm + mu * mu).sqrt() - self.y[self.y.len() - 1]
            }
        };
        Ok(base + self.alpha4 * mu)
    }

    pub fn msa_gradient(&self, mu: f64) -> Result<DVector<f64>> {
        let mu = effective_mu(mu)?;
        match &self.kind {
            PointKind::Orthant => {
                let (_, w) = logsumexp_kernel(self.y.as_slice(), mu);
                Ok(DVector::from_vec(w))
            }
            PointKind::Spectral { values, vectors } => {
                let (_, w) = logsumexp_kernel(values.as_slice(), mu);
                let m = values.len();
                let mut grad = DMatrix::<f64>::zeros(m, m);
                for (i, wi) in w.iter().enumerate() {
                    if *wi == 0.0 {
                        continue;
                    }
                    let col = vectors.column(i);
                    grad.ger(*wi, &col, &col, 1.0);
                }
                // exact symmetry of the returned element
                let sym = (&grad + grad.transpose()) * 0.5;
                Ok(DVector::from_column_slice(sym.as_slice()))
            }
            PointKind::PCone {
                sq_norm,
                smoothable,
                ..
            } => {
                require_smoothable(*smoothable)?;
                let m = self.y.len() - 1;
                let denom = (sq_norm + mu * mu).sqrt();
                let mut g = DVector::zeros(m + 1);
                for i in 0..m {
                    g[i] = self.y[i] / denom;
                }
                g[m] = -1.0;
                Ok(g)
            }
        }
    }
}

fn require_smoothable(smoothable: bool) -> Result<()> {
    if smoothable {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "smoothing is only available for the p-cone with p = 2".into(),
        ))
    }
}

/// Validates `mu > 0` and clamps it to [`MU_FLOOR`].
pub(crate) fn effective_mu(mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "smoothing parameter must be positive and finite, got {mu}"
        )));
    }
    if mu < MU_FLOOR {
        log::warn!("smoothing parameter {mu:e} clamped to {MU_FLOOR:e}");
        return Ok(MU_FLOOR);
    }
    Ok(mu)
}

fn symmetrize(m: usize, y: &DVector<f64>) -> Result<DMatrix<f64>> {
    let mat = DMatrix::from_column_slice(m, m, y.as_slice());
    let skew = (&mat - mat.transpose()).norm();
    let scale = mat.norm();
    if skew > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (relative asymmetry {:e})",
            skew / scale
        )));
    }
    Ok((&mat + mat.transpose()) * 0.5)
}

fn sorted_eigen(mat: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let m = mat.nrows();
    let eig = SymmetricEigen::try_new(mat.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("symmetric eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(m, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

fn logsumexp_value(v: &[f64], mu: f64) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = v.iter().map(|x| ((x - max) / mu).exp()).sum();
    max + mu * sum.ln()
}

fn logsumexp_kernel(v: &[f64], mu: f64) -> (f64, Vec<f64>) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = v.iter().map(|x| ((x - max) / mu).exp()).collect();
    let sum: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= sum;
    }
    (max + mu * sum.ln(), w)
}

/// Max-shifted `mu log sum exp(v_i / mu)` and the matching softmax weights.
pub fn stable_logsumexp(v: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("log-sum-exp of an empty vector".into()));
    }
    check_finite("log-sum-exp input", v)?;
    let mu = effective_mu(mu)?;
    Ok(logsumexp_kernel(v, mu))
}

/// Smoothing `sum_i sqrt(y_i^2 + mu^2)` of the l1 norm with certificate
/// `(0, 1, m)`. Standalone kernel; not attached to any cone family.
pub fn smoothed_l1(y: &DVector<f64>, mu: f64) -> Result<(f64, DVector<f64>)> {
    check_finite("smoothed l1 input", y.as_slice())?;
    let mu = effective_mu(mu)?;
    let mut value = 0.0;
    let grad = y.map(|v| {
        let r = (v * v + mu * mu).sqrt();
        value += r;
        v / r
    });
    Ok((value, grad))
}
