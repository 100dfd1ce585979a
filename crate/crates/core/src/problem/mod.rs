//! Problem oracles for `min f(x) + P1(x) - P2(x)  s.t.  G(x) in K`, and the
//! smoothed constraint `g_mu = h_mu o G`.

mod concave;
mod constraint;
mod objective;
mod regularizer;

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

pub use concave::{ConcaveTerm, WeightedL1Term, ZeroTerm};
pub use constraint::{AffineMap, ConstraintMap};
pub use objective::{PolyObjective, SmoothObjective};
pub use regularizer::{soft_threshold, ProxRegularizer};

use crate::cone::{ConeBaseOracle, ConePoint};
use crate::error::{check_dim, check_finite, Result};

/// An immutable conic-constrained difference-of-convex program.
#[derive(Debug)]
pub struct DCProblem {
    f: Box<dyn SmoothObjective>,
    p1: ProxRegularizer,
    p2: Box<dyn ConcaveTerm>,
    g: Box<dyn ConstraintMap>,
    cone: ConeBaseOracle,
}

impl DCProblem {
    pub fn new(
        f: Box<dyn SmoothObjective>,
        p1: ProxRegularizer,
        p2: Box<dyn ConcaveTerm>,
        g: Box<dyn ConstraintMap>,
        cone: ConeBaseOracle,
    ) -> Result<Self> {
        let n = f.dim();
        if let Some(k) = p1.dim() {
            check_dim("regularizer dimension", n, k)?;
        }
        check_dim("constraint map input", n, g.dim_in())?;
        check_dim("constraint map output", cone.dim(), g.dim_out())?;
        Ok(Self {
            f,
            p1,
            p2,
            g,
            cone,
        })
    }

    /// Replaces the smoothing shift `alpha4` of the cone oracle.
    pub fn with_alpha4(self, alpha4: f64) -> Result<Self> {
        let cone = self.cone.with_alpha4(alpha4)?;
        Ok(Self { cone, ..self })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn cone(&self) -> &ConeBaseOracle {
        &self.cone
    }

    pub fn regularizer(&self) -> &ProxRegularizer {
        &self.p1
    }

    pub fn smooth(&self) -> &dyn SmoothObjective {
        self.f.as_ref()
    }

    pub fn concave(&self) -> &dyn ConcaveTerm {
        self.p2.as_ref()
    }

    pub fn constraint(&self) -> &dyn ConstraintMap {
        self.g.as_ref()
    }

    fn check_x(&self, x: &DVector<f64>) -> Result<()> {
        check_dim("decision vector", self.dim(), x.len())?;
        check_finite("decision vector", x.as_slice())
    }

    /// `psi(x) = f(x) + P1(x) - P2(x)`.
    pub fn objective_value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.f.value(x) + self.p1.value(x)? - self.p2.value(x))
    }

    /// `grad f(x)`; `P1` and `P2` are handled by prox and subgradient.
    pub fn objective_f_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_x(x)?;
        Ok(self.f.gradient(x))
    }

    pub fn concave_subgradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_x(x)?;
        Ok(self.p2.subgradient(x))
    }

    pub fn constraint_value(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_x(x)?;
        Ok(self.g.value(x))
    }

    /// `G(x)` together with its cached cone decomposition.
    pub fn constraint_point(&self, x: &DVector<f64>) -> Result<ConePoint> {
        self.cone.evaluate(&self.constraint_value(x)?)
    }

    /// `g_B(x) = sigma_B(G(x))`.
    pub fn support_at(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.constraint_point(x)?.support())
    }

    /// `g_mu(x) = h_mu(G(x))`.
    pub fn composite_value(&self, x: &DVector<f64>, mu: f64) -> Result<f64> {
        self.constraint_point(x)?.msa_value(mu)
    }

    /// `grad g_mu(x) = DG(x)^* grad h_mu(G(x))`.
    pub fn composite_gradient(&self, x: &DVector<f64>, mu: f64) -> Result<DVector<f64>> {
        let point = self.constraint_point(x)?;
        self.composite_gradient_at(x, &point, mu)
    }

    /// Same as [`composite_gradient`](Self::composite_gradient) for an already
    /// evaluated `G(x)`.
    pub fn composite_gradient_at(
        &self,
        x: &DVector<f64>,
        point: &ConePoint,
        mu: f64,
    ) -> Result<DVector<f64>> {
        Ok(self.g.adjoint_apply(x, &point.msa_gradient(mu)?))
    }
}

/// Concrete instance families.
pub mod instances {
    use super::*;

    /// `min ||x - c||^2 / 2 (+ w ||x||_1)  s.t.  x <= b`.
    pub fn box_problem(
        c: &DVector<f64>,
        b: &DVector<f64>,
        l1_weight: Option<f64>,
    ) -> Result<DCProblem> {
        check_dim("box bound", c.len(), b.len())?;
        let n = c.len();
        let p1 = match l1_weight {
            Some(w) => ProxRegularizer::l1_uniform(n, w)?,
            None => ProxRegularizer::Zero,
        };
        DCProblem::new(
            Box::new(PolyObjective::distance_to(c)),
            p1,
            Box::new(ZeroTerm),
            Box::new(AffineMap::shifted_identity(b)),
            ConeBaseOracle::nonpos_orthant(n)?,
        )
    }

    /// `l1`-regularized nonlinear SDP:
    /// `min sum_i (d_i x_i^4/4 + c_i |x_i|^3/3) + x'Qx/2 + b'x + w ||x||_1`
    /// s.t. `-A_0 - sum_i x_i A_i` negative semidefinite.
    pub fn nsdp_problem(
        q: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        d: DVector<f64>,
        a: &[DMatrix<f64>],
        l1_weight: f64,
    ) -> Result<DCProblem> {
        let n = b.len();
        check_dim("pencil length (A_0..A_n)", n + 1, a.len())?;
        let m = a[0].nrows();
        let f = PolyObjective::new(q, b, c, d)?;
        let g = AffineMap::negated_matrix_pencil(&a[0], &a[1..])?;
        DCProblem::new(
            Box::new(f),
            ProxRegularizer::l1_uniform(n, l1_weight)?,
            Box::new(ZeroTerm),
            Box::new(g),
            ConeBaseOracle::neg_semidef(m)?,
        )
    }

    /// `min ||x - c||^2 / 2 (+ w ||x||_1)  s.t.  ||x - center|| <= radius`,
    /// written as a second-order cone constraint.
    pub fn ball_problem(
        c: &DVector<f64>,
        center: &DVector<f64>,
        radius: f64,
        l1_weight: Option<f64>,
    ) -> Result<DCProblem> {
        check_dim("ball center", c.len(), center.len())?;
        let n = c.len();
        let p1 = match l1_weight {
            Some(w) => ProxRegularizer::l1_uniform(n, w)?,
            None => ProxRegularizer::Zero,
        };
        DCProblem::new(
            Box::new(PolyObjective::distance_to(c)),
            p1,
            Box::new(ZeroTerm),
            Box::new(AffineMap::ball(center, radius)),
            ConeBaseOracle::p_cone(n, 2.0)?,
        )
    }

    /// Same family as [`nsdp_problem`] with the constraint over flattened
    /// vectors and an arbitrary cone (used by the problem-file loader).
    pub fn pencil_problem(
        f: PolyObjective,
        l1_weight: f64,
        a: &[DVector<f64>],
        cone: ConeBaseOracle,
    ) -> Result<DCProblem> {
        let n = f.dim();
        check_dim("pencil length (A_0..A_n)", n + 1, a.len())?;
        let rest: Vec<DVector<f64>> = a[1..].to_vec();
        let g = AffineMap::negated_pencil(&a[0], &rest)?;
        let p1 = if l1_weight == 0.0 {
            ProxRegularizer::Zero
        } else {
            ProxRegularizer::l1_uniform(n, l1_weight)?
        };
        DCProblem::new(Box::new(f), p1, Box::new(ZeroTerm), Box::new(g), cone)
    }
}

#[cfg(test)]
mod tests {
    use super::instances::*;
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn shifted(p: DCProblem, alpha4: f64) -> DCProblem {
        p.with_alpha4(alpha4).unwrap()
    }

    #[test]
    fn composite_value_orthant() {
        let b = dv(&[1.0, 1.0]);
        let p = shifted(box_problem(&dv(&[0.0, 0.0]), &b, None).unwrap(), 0.0);
        let v = p.composite_value(&dv(&[1.0, 1.0]), 1.0).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let v = p.composite_value(&dv(&[0.0, 0.0]), 0.1).unwrap();
        assert!((v - (-1.0 + 0.1 * 2f64.ln())).abs() < 1e-14);
        assert!((v + 0.930685).abs() < 1e-6);
        let g = p.composite_gradient(&dv(&[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(g.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn composite_value_psd() {
        let a0 = DMatrix::from_diagonal(&dv(&[2.0, 3.0]));
        let a1 = DMatrix::identity(2, 2);
        let p = nsdp_problem(
            DMatrix::zeros(1, 1),
            dv(&[0.0]),
            dv(&[0.0]),
            dv(&[0.0]),
            &[a0, a1],
            1.0,
        )
        .unwrap();
        let p = shifted(p, 0.0);
        let v = p.composite_value(&dv(&[0.0]), 1.0).unwrap();
        let expected = ((-2f64).exp() + (-3f64).exp()).ln();
        assert!((v - expected).abs() < 1e-14);
        assert!((v + 1.686).abs() < 1e-3);
    }

    #[test]
    fn composite_gradient_ball() {
        let p = ball_problem(&dv(&[0.0, 0.0]), &dv(&[0.0, 0.0]), 1.0, None).unwrap();
        let g = p.composite_gradient(&dv(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn nsdp_objective_value() {
        let p = nsdp_problem(
            DMatrix::identity(2, 2),
            dv(&[0.0, 0.0]),
            dv(&[0.0, 0.0]),
            dv(&[0.0, 0.0]),
            &[DMatrix::identity(1, 1), DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)],
            1.0,
        )
        .unwrap();
        assert_eq!(p.objective_value(&dv(&[1.0, -1.0])).unwrap(), 3.0);
    }

    #[test]
    fn dimension_checks() {
        let b = dv(&[1.0, 1.0]);
        let p = box_problem(&dv(&[0.0, 0.0]), &b, Some(1.0)).unwrap();
        assert!(p.objective_value(&dv(&[1.0])).is_err());
        assert!(p.composite_value(&dv(&[1.0, 2.0, 3.0]), 1.0).is_err());
        assert!(box_problem(&dv(&[0.0]), &b, None).is_err());
        // G output must match the cone dimension
        let bad = DCProblem::new(
            Box::new(PolyObjective::distance_to(&b)),
            ProxRegularizer::Zero,
            Box::new(ZeroTerm),
            Box::new(AffineMap::shifted_identity(&b)),
            ConeBaseOracle::nonpos_orthant(3).unwrap(),
        );
        assert!(bad.is_err());
    }
}
