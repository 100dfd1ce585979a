use nalgebra::DVector;

/// The subtracted convex part `P2`; only a value and one subgradient are needed.
pub trait ConcaveTerm: Send + Sync + core::fmt::Debug {
    fn value(&self, x: &DVector<f64>) -> f64;
    /// One deterministic element of `dP2(x)`.
    fn subgradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroTerm;

impl ConcaveTerm for ZeroTerm {
    fn value(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }

    fn subgradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }
}

/// `P2(x) = sum_i w_i |x_i|`; ties at `x_i = 0` resolve to the subgradient `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedL1Term {
    pub weights: DVector<f64>,
}

impl ConcaveTerm for WeightedL1Term {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.weights.iter().zip(x.iter()).map(|(w, x)| w * x.abs()).sum()
    }

    fn subgradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.zip_map(&self.weights, |xi, wi| if xi == 0.0 { 0.0 } else { wi * xi.signum() })
    }
}
