//! Smoothing-parameter sequences `mu_k`.
//!
//! All variants share the blockwise index: write `k = k2 (n0 + 1) + k1` with
//! `k1 <= n0` and set `kbar = k2 (n0 + 1) + nu0 k1`. Within a block of `n0 + 1`
//! iterations `mu` then barely moves (for small `nu0`) and drops at block
//! boundaries.

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Exponent rule `r_j` for the blockwise schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "rule", rename_all = "snake_case"))]
pub enum RateRule {
    Constant { r: f64 },
    /// `r_j = 0.01 + min(1, j / horizon) (rbar - 0.01)`.
    Ramp { rbar: f64, horizon: u64 },
}

impl RateRule {
    fn at(&self, j: f64) -> f64 {
        match *self {
            RateRule::Constant { r } => r,
            RateRule::Ramp { rbar, horizon } => 0.01 + ramp(j, horizon) * (rbar - 0.01),
        }
    }

    fn sup(&self) -> f64 {
        match *self {
            RateRule::Constant { r } => r,
            RateRule::Ramp { rbar, .. } => rbar,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RateRule::Constant { r } => check_open("r", r, 0.0, 1.0),
            RateRule::Ramp { rbar, horizon } => {
                check_open("rbar", rbar, 0.01, 1.0)?;
                check_horizon(horizon)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "variant", rename_all = "snake_case"))]
pub enum ScheduleKind {
    /// `mu0 (k + 1)^-r`.
    Power { r: f64 },
    /// `mu0 (kbar + 1)^-r_k`.
    Blockwise { n0: u64, nu0: f64, rate: RateRule },
    /// `mu0 (kbar + 1)^-r_kbar ln(kbar + 3)^-s_kbar` with
    /// `r_j = 0.01 + min(1, j/K)(rbar - 0.01)` and `s_j = min(1, j/K) sbar`.
    RampedLog {
        n0: u64,
        nu0: f64,
        rbar: f64,
        sbar: f64,
        horizon: u64,
    },
}

impl ScheduleKind {
    /// The experiment defaults: `n0 = 300`, `nu0 = 1/(10 n0 + 1)`, `K = 5000`.
    pub fn ramped_log(rbar: f64, sbar: f64) -> Self {
        ScheduleKind::RampedLog {
            n0: 300,
            nu0: 1.0 / 3001.0,
            rbar,
            sbar,
            horizon: 5000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScheduleKind::Power { r } => check_open("r", r, 0.0, 1.0),
            ScheduleKind::Blockwise { nu0, rate, .. } => {
                check_nu0(nu0)?;
                rate.validate()
            }
            ScheduleKind::RampedLog {
                nu0,
                rbar,
                sbar,
                horizon,
                ..
            } => {
                check_nu0(nu0)?;
                check_open("rbar", rbar, 0.01, 1.0)?;
                if !(sbar >= 0.0) || !sbar.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "sbar must be finite and nonnegative, got {sbar}"
                    )));
                }
                check_horizon(horizon)
            }
        }
    }

    /// `sup_k r_k`, the exponent governing the divergence bound.
    pub fn rbar(&self) -> f64 {
        match *self {
            ScheduleKind::Power { r } => r,
            ScheduleKind::Blockwise { rate, .. } => rate.sup(),
            ScheduleKind::RampedLog { rbar, .. } => rbar,
        }
    }
}

/// A validated schedule anchored at `mu0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub mu0: f64,
}

impl ScheduleSpec {
    pub fn new(kind: ScheduleKind, mu0: f64) -> Result<Self> {
        kind.validate()?;
        if !(mu0 > 0.0) || !mu0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mu0 must be positive and finite, got {mu0}"
            )));
        }
        Ok(Self { kind, mu0 })
    }

    pub fn mu_at(&self, k: u64) -> f64 {
        match self.kind {
            ScheduleKind::Power { r } => self.mu0 * ((k + 1) as f64).powf(-r),
            ScheduleKind::Blockwise { n0, nu0, rate } => {
                let kbar = block_index(k, n0, nu0);
                self.mu0 * (kbar + 1.0).powf(-rate.at(k as f64))
            }
            ScheduleKind::RampedLog {
                n0,
                nu0,
                rbar,
                sbar,
                horizon,
            } => {
                let kbar = block_index(k, n0, nu0);
                let t = ramp(kbar, horizon);
                let r = 0.01 + t * (rbar - 0.01);
                let s = t * sbar;
                self.mu0 * (kbar + 1.0).powf(-r) * (kbar + 3.0).ln().powf(-s)
            }
        }
    }

    /// `S_K = sum_{k = ceil(K/2)}^{K} mu_k`.
    pub fn partial_sum(&self, big_k: u64) -> f64 {
        (big_k.div_ceil(2)..=big_k).map(|k| self.mu_at(k)).sum()
    }

    /// Lower bound `mu0 K^(1 - rbar) / 2^(2 rbar + 1)` on [`partial_sum`](Self::partial_sum).
    pub fn partial_sum_lower_bound(&self, big_k: u64) -> f64 {
        let r = self.kind.rbar();
        self.mu0 * (big_k as f64).powf(1.0 - r) / 2f64.powf(2.0 * r + 1.0)
    }
}

fn block_index(k: u64, n0: u64, nu0: f64) -> f64 {
    let k2 = k / (n0 + 1);
    let k1 = k % (n0 + 1);
    (k2 * (n0 + 1)) as f64 + nu0 * k1 as f64
}

fn ramp(j: f64, horizon: u64) -> f64 {
    (j / horizon as f64).min(1.0)
}

fn check_open(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v > lo && v < hi {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must lie in ({lo}, {hi}), got {v}"
        )))
    }
}

fn check_nu0(nu0: f64) -> Result<()> {
    if nu0 > 0.0 && nu0 <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "nu0 must lie in (0, 1], got {nu0}"
        )))
    }
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon == 0 {
        Err(Error::InvalidArgument("ramp horizon must be positive".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_examples() {
        let s = ScheduleSpec::new(ScheduleKind::Power { r: 0.5 }, 1.0).unwrap();
        assert_eq!(s.mu_at(3), 0.5);
        assert_eq!(s.partial_sum(0), 1.0);
        let expected = 3f64.powf(-0.5) + 0.5 + 5f64.powf(-0.5);
        assert!((s.partial_sum(4) - expected).abs() < 1e-15);
        assert!((s.partial_sum(4) - 1.5245639).abs() < 1e-6);
    }

    #[test]
    fn blockwise_example() {
        let s = ScheduleSpec::new(
            ScheduleKind::Blockwise {
                n0: 2,
                nu0: 0.5,
                rate: RateRule::Constant { r: 0.5 },
            },
            1.0,
        )
        .unwrap();
        // k = 4 = 1 * 3 + 1
        assert!((s.mu_at(4) - 4.5f64.powf(-0.5)).abs() < 1e-15);
        assert!((s.mu_at(4) - 0.471405).abs() < 1e-6);
    }

    #[test]
    fn anchored_at_mu0() {
        for kind in [
            ScheduleKind::Power { r: 0.3 },
            ScheduleKind::Blockwise {
                n0: 5,
                nu0: 0.1,
                rate: RateRule::Ramp {
                    rbar: 0.7,
                    horizon: 100,
                },
            },
            ScheduleKind::ramped_log(0.9, 3.0),
        ] {
            let s = ScheduleSpec::new(kind, 0.37).unwrap();
            assert_eq!(s.mu_at(0), 0.37);
        }
    }

    #[test]
    fn ramped_log_without_log_reduces_to_blockwise_ramp() {
        let a = ScheduleSpec::new(ScheduleKind::ramped_log(0.6, 0.0), 1.0).unwrap();
        for k in [1, 17, 300, 301, 302, 4000, 9000] {
            let kbar = block_index(k, 300, 1.0 / 3001.0);
            let r = 0.01 + (kbar / 5000.0).min(1.0) * 0.59;
            let expected = (kbar + 1.0).powf(-r);
            assert!((a.mu_at(k) - expected).abs() <= 1e-15 * expected);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(ScheduleSpec::new(ScheduleKind::Power { r: 1.0 }, 1.0).is_err());
        assert!(ScheduleSpec::new(ScheduleKind::Power { r: 0.5 }, 0.0).is_err());
        assert!(ScheduleSpec::new(ScheduleKind::ramped_log(0.01, 0.0), 1.0).is_err());
        assert!(ScheduleSpec::new(ScheduleKind::ramped_log(0.5, -1.0), 1.0).is_err());
        assert!(ScheduleSpec::new(
            ScheduleKind::Blockwise {
                n0: 1,
                nu0: 1.5,
                rate: RateRule::Constant { r: 0.5 }
            },
            1.0
        )
        .is_err());
    }
}
