//! Stochastic stand-ins for human reaction time.

use rand_core::RngCore;
use rand_distr::{Distribution, Normal};

use crate::Error;

/// A distribution over non-negative delays in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LatencyModel {
    #[default]
    Zero,
    Constant {
        value_ms: f64,
    },
    /// Normal distribution with negative draws clamped to zero.
    Normal {
        mean_ms: f64,
        sd_ms: f64,
    },
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            LatencyModel::Zero => Ok(()),
            LatencyModel::Constant { value_ms } if value_ms.is_finite() && value_ms >= 0.0 => Ok(()),
            LatencyModel::Constant { .. } => Err(Error::InvalidArgument("constant latency must be finite and >= 0")),
            LatencyModel::Normal { mean_ms, sd_ms } if mean_ms.is_finite() && sd_ms.is_finite() && sd_ms >= 0.0 => {
                Ok(())
            }
            LatencyModel::Normal { .. } => Err(Error::InvalidArgument("normal latency needs finite mean and sd >= 0")),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            LatencyModel::Zero => true,
            LatencyModel::Constant { value_ms } => value_ms == 0.0,
            LatencyModel::Normal { .. } => false,
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LatencyModel::Zero => 0.0,
            LatencyModel::Constant { value_ms } => value_ms.max(0.0),
            LatencyModel::Normal { mean_ms, sd_ms } => match Normal::new(mean_ms, sd_ms) {
                Ok(normal) => normal.sample(rng).max(0.0),
                Err(_) => mean_ms.max(0.0),
            },
        }
    }

    /// Location parameter before clamping: the constant, or the normal mean.
    pub fn center_ms(&self) -> f64 {
        match *self {
            LatencyModel::Zero => 0.0,
            LatencyModel::Constant { value_ms } => value_ms,
            LatencyModel::Normal { mean_ms, .. } => mean_ms,
        }
    }

    /// Moves the location by `delta_ms`, keeping the spread. Constants stay
    /// non-negative; a zero model only moves up.
    pub fn shifted(&self, delta_ms: f64) -> Self {
        match *self {
            LatencyModel::Zero if delta_ms <= 0.0 => LatencyModel::Zero,
            LatencyModel::Zero => LatencyModel::Constant { value_ms: delta_ms },
            LatencyModel::Constant { value_ms } => LatencyModel::Constant {
                value_ms: (value_ms + delta_ms).max(0.0),
            },
            LatencyModel::Normal { mean_ms, sd_ms } => LatencyModel::Normal {
                mean_ms: mean_ms + delta_ms,
                sd_ms,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn samples_never_negative() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let model = LatencyModel::Normal {
            mean_ms: 10.0,
            sd_ms: 100.0,
        };
        let mut clamped = 0;
        for _ in 0..10_000 {
            let s = model.sample(&mut rng);
            assert!(s >= 0.0);
            if s == 0.0 {
                clamped += 1;
            }
        }
        // P(X < 0) = Phi(-0.1) ~ 0.46
        assert!((4_200..5_000).contains(&clamped), "{clamped}");
        assert_eq!(LatencyModel::Constant { value_ms: -3.0 }.sample(&mut rng), 0.0);
        assert_eq!(LatencyModel::Zero.sample(&mut rng), 0.0);
    }

    #[test]
    fn normal_sample_mean() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let model = LatencyModel::Normal {
            mean_ms: 1500.0,
            sd_ms: 400.0,
        };
        let n = 20_000;
        let mean = (0..n).map(|_| model.sample(&mut rng)).sum::<f64>() / n as f64;
        // standard error 400/sqrt(20000) ~ 2.8
        assert!((mean - 1500.0).abs() < 15.0, "{mean}");
    }

    #[test]
    fn validation() {
        assert!(LatencyModel::Normal {
            mean_ms: 1.0,
            sd_ms: -1.0
        }
        .validate()
        .is_err());
        assert!(LatencyModel::Constant { value_ms: f64::NAN }.validate().is_err());
        assert!(LatencyModel::Normal {
            mean_ms: -5.0,
            sd_ms: 1.0
        }
        .validate()
        .is_ok());
        assert!(LatencyModel::Zero.is_zero());
        assert_eq!(
            LatencyModel::Normal {
                mean_ms: 5.0,
                sd_ms: 1.0
            }
            .shifted(-2.0),
            LatencyModel::Normal {
                mean_ms: 3.0,
                sd_ms: 1.0
            }
        );
        assert_eq!(LatencyModel::Zero.shifted(-1.0), LatencyModel::Zero);
        assert_eq!(
            LatencyModel::Zero.shifted(2.0),
            LatencyModel::Constant { value_ms: 2.0 }
        );
        assert_eq!(
            LatencyModel::Constant { value_ms: 1.0 }.shifted(-3.0),
            LatencyModel::Constant { value_ms: 0.0 }
        );
    }
}
