//! Error distributions for the simulated responses. All draws have mean 0 and variance 1.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Gaussian,
    /// Equal-weight sum of a standardized t(5) draw and a centered Exp(1) draw,
    /// rescaled to unit variance. Heavy tails plus right skew.
    HeavyTail,
}

impl Noise {
    pub fn name(&self) -> &'static str {
        match self {
            Noise::Gaussian => "gaussian",
            Noise::HeavyTail => "heavy-tail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Some(Noise::Gaussian),
            "heavy-tail" | "heavytail" | "heavy" => Some(Noise::HeavyTail),
            _ => None,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Noise::Gaussian => rng.sample(StandardNormal),
            Noise::HeavyTail => {
                // t(5) has variance 5/3, Exp(1) has variance 1
                let t = StudentT::new(5.0).expect("5 degrees of freedom").sample(rng) / (5.0f64 / 3.0).sqrt();
                let e: f64 = rng.sample::<f64, _>(Exp1) - 1.0;
                (t + e) / std::f64::consts::SQRT_2
            }
        }
    }
}
