use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};

/// The constraint map `G : X -> Y`, exposed through its value and the adjoint
/// of its derivative.
pub trait ConstraintMap: Send + Sync + core::fmt::Debug {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `DG(x)^* u`.
    fn adjoint_apply(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;
    /// Lipschitz constant of `DG` (zero for affine maps).
    fn lipschitz_jacobian(&self) -> f64;
}

/// `G(x) = offset + J x` with `J` stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    offset: DVector<f64>,
    jacobian: DMatrix<f64>,
}

impl AffineMap {
    pub fn new(offset: DVector<f64>, jacobian: DMatrix<f64>) -> Result<Self> {
        check_dim("affine map rows", offset.len(), jacobian.nrows())?;
        Ok(Self { offset, jacobian })
    }

    /// `G(x) = x - b`.
    pub fn shifted_identity(b: &DVector<f64>) -> Self {
        let n = b.len();
        Self {
            offset: -b,
            jacobian: DMatrix::identity(n, n),
        }
    }

    /// `G(x) = -A_0 - sum_i x_i A_i` over flattened `m x m` matrices.
    pub fn negated_matrix_pencil(a0: &DMatrix<f64>, a: &[DMatrix<f64>]) -> Result<Self> {
        let m = a0.nrows();
        check_dim("A_0 columns", m, a0.ncols())?;
        let mut jacobian = DMatrix::zeros(m * m, a.len());
        for (i, ai) in a.iter().enumerate() {
            check_dim("A_i rows", m, ai.nrows())?;
            check_dim("A_i columns", m, ai.ncols())?;
            jacobian.set_column(i, &-DVector::from_column_slice(ai.as_slice()));
        }
        Ok(Self {
            offset: -DVector::from_column_slice(a0.as_slice()),
            jacobian,
        })
    }

    /// Same pencil over flattened vectors of any length.
    pub fn negated_pencil(a0: &DVector<f64>, a: &[DVector<f64>]) -> Result<Self> {
        let cols: Vec<DVector<f64>> = a.iter().map(|ai| -ai).collect();
        for ai in a {
            check_dim("pencil element", a0.len(), ai.len())?;
        }
        let jacobian = if cols.is_empty() {
            DMatrix::zeros(a0.len(), 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        Ok(Self {
            offset: -a0,
            jacobian,
        })
    }

    /// `G(x) = (x - center, radius)`, so `G(x)` lies in the second-order cone
    /// iff `||x - center|| <= radius`.
    pub fn ball(center: &DVector<f64>, radius: f64) -> Self {
        let n = center.len();
        let mut offset = DVector::zeros(n + 1);
        offset.rows_mut(0, n).copy_from(&-center);
        offset[n] = radius;
        let mut jacobian = DMatrix::zeros(n + 1, n);
        jacobian
            .view_mut((0, 0), (n, n))
            .copy_from(&DMatrix::identity(n, n));
        Self { offset, jacobian }
    }
}

impl ConstraintMap for AffineMap {
    fn dim_in(&self) -> usize {
        self.jacobian.ncols()
    }

    fn dim_out(&self) -> usize {
        self.offset.len()
    }

    fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.offset + &self.jacobian * x
    }

    fn adjoint_apply(&self, _x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.jacobian.tr_mul(u)
    }

    fn lipschitz_jacobian(&self) -> f64 {
        0.0
    }
}
