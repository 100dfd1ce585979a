//! Ground-truth oracles used by the test suites.
//!
//! Everything here works on plain slices and shares no code with
//! `smba-core`, so a bug in the solver cannot hide in its own reference.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("grid search is limited to 3 dimensions, got {0}")]
    TooManyDimensions(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no feasible grid node")]
    NoFeasibleNode,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Tensor grid with `points_per_axis` equispaced nodes per coordinate,
/// endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points_per_axis: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points_per_axis: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(OracleError::DimensionMismatch(lower.len(), upper.len()));
        }
        if lower.is_empty() {
            return Err(OracleError::InvalidGrid("zero-dimensional grid".into()));
        }
        if points_per_axis < 3 {
            return Err(OracleError::InvalidGrid(format!(
                "need at least 3 points per axis, got {points_per_axis}"
            )));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(OracleError::InvalidGrid(format!("bad bounds [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            lower,
            upper,
            points_per_axis,
        })
    }

    /// Same bounds on every axis.
    pub fn cube(dim: usize, lower: f64, upper: f64, points_per_axis: usize) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim], points_per_axis)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Spacing along axis `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.points_per_axis - 1) as f64
    }

    /// The grid with `2p - 1` points per axis; every node of `self` is a node of it.
    pub fn refined(&self) -> Self {
        Self {
            points_per_axis: 2 * self.points_per_axis - 1,
            ..self.clone()
        }
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = (self.lower[axis], self.upper[axis]);
        lo + (hi - lo) * i as f64 / (self.points_per_axis - 1) as f64
    }

    fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim() as u32)
    }

    fn fill_node(&self, mut index: usize, out: &mut [f64]) {
        // last axis varies fastest
        for axis in (0..self.dim()).rev() {
            out[axis] = self.coord(axis, index % self.points_per_axis);
            index /= self.points_per_axis;
        }
    }
}

/// `argmin (1/2)||x - c||^2  s.t.  x <= b`, i.e. `min(c, b)` componentwise.
pub fn analytic_box_solution(c: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if c.len() != b.len() {
        return Err(OracleError::DimensionMismatch(c.len(), b.len()));
    }
    Ok(c.iter().zip(b).map(|(c, b)| c.min(*b)).collect())
}

/// Euclidean projection of `z` onto the ball `B(w, r)`.
pub fn exact_ball_projection(z: &[f64], w: &[f64], r: f64) -> Result<Vec<f64>> {
    if z.len() != w.len() {
        return Err(OracleError::DimensionMismatch(z.len(), w.len()));
    }
    if r.is_nan() || r <= 0.0 {
        return Err(OracleError::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let dist = z.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if dist <= r {
        return Ok(z.to_vec());
    }
    Ok(z.iter().zip(w).map(|(z, w)| w + r * (z - w) / dist).collect())
}

/// Exhaustive search over the grid. Ties go to the node visited first
/// (lexicographic order of the node index, last axis fastest).
pub fn grid_bruteforce<F, P>(objective: F, feasible: P, grid: &GridSpec) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&[f64]) -> bool,
{
    if grid.dim() > 3 {
        return Err(OracleError::TooManyDimensions(grid.dim()));
    }
    let mut node = vec![0.0; grid.dim()];
    let mut best: Option<(usize, f64)> = None;
    for index in 0..grid.node_count() {
        grid.fill_node(index, &mut node);
        if !feasible(&node) {
            continue;
        }
        let val = objective(&node);
        if best.is_none_or(|(_, b)| val < b) {
            best = Some((index, val));
        }
    }
    let (index, val) = best.ok_or(OracleError::NoFeasibleNode)?;
    grid.fill_node(index, &mut node);
    Ok((node, val))
}

/// Eigenvalues (ascending) of a symmetric `m x m` matrix given row-major,
/// by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: usize, a: &[f64]) -> Result<Vec<f64>> {
    if a.len() != m * m {
        return Err(OracleError::DimensionMismatch(m * m, a.len()));
    }
    let mut s = a.to_vec();
    for i in 0..m {
        for j in 0..i {
            let avg = 0.5 * (s[i * m + j] + s[j * m + i]);
            s[i * m + j] = avg;
            s[j * m + i] = avg;
        }
    }
    let scale = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i * m + j] * s[i * m + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q * m + q] - s[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let akp = s[k * m + p];
                    let akq = s[k * m + q];
                    s[k * m + p] = c * akp - sn * akq;
                    s[k * m + q] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let apk = s[p * m + k];
                    let aqk = s[q * m + k];
                    s[p * m + k] = c * apk - sn * aqk;
                    s[q * m + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..m).map(|i| s[i * m + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}
