//! Kernel relations over the Euclidean distance.
//!
//! Every family here is reflexive with values in `[0, 1]`, so a kernel can be
//! used directly as an indiscernibility relation. Each evaluation also has a
//! closed-form derivative in the width parameter `gamma`, which the gradient
//! fitting in [`crate::tuning`] relies on.
//!
//! With `r = ||x - y||₂` and `t = r / gamma`:
//!
//! | family             | k                                   | ∂k/∂γ                              |
//! |--------------------|-------------------------------------|------------------------------------|
//! | Gaussian           | `exp(-r²/γ)`                        | `r²/γ² · exp(-r²/γ)`               |
//! | exponential        | `exp(-r/γ)`                         | `r/γ² · exp(-r/γ)`                 |
//! | rational quadratic | `γ / (r² + γ)`                      | `r² / (r² + γ)²`                   |
//! | circular           | `2/π (acos t − t √(1 − t²))`, r < γ | `4/π · r/γ² · √(1 − t²)`, r < γ    |
//! | spherical          | `1 − 3t/2 + t³/2`, r < γ            | `3/2 · r/γ⁴ · (γ² − r²)`, r < γ    |
//!
//! Circular and spherical are zero (with zero derivative) for `r ≥ γ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::relations::RelationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gaussian,
    Exponential,
    RationalQuadratic,
    Circular,
    Spherical,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 5] = [
        KernelFamily::Gaussian,
        KernelFamily::Exponential,
        KernelFamily::RationalQuadratic,
        KernelFamily::Circular,
        KernelFamily::Spherical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gauss",
            KernelFamily::Exponential => "exp",
            KernelFamily::RationalQuadratic => "rat",
            KernelFamily::Circular => "circle",
            KernelFamily::Spherical => "sphere",
        }
    }

    /// Compactly supported families vanish for `r >= gamma`.
    pub fn has_compact_support(self) -> bool {
        matches!(self, KernelFamily::Circular | KernelFamily::Spherical)
    }

    /// Kernel value as a function of the distance `r`.
    pub fn value_at(self, r: f64, gamma: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => (-r * r / gamma).exp(),
            KernelFamily::Exponential => (-r / gamma).exp(),
            KernelFamily::RationalQuadratic => gamma / (r * r + gamma),
            KernelFamily::Circular => {
                if r >= gamma {
                    return 0.0;
                }
                let t = r / gamma;
                (2.0 / PI) * (t.acos() - t * (1.0 - t * t).sqrt())
            }
            KernelFamily::Spherical => {
                if r >= gamma {
                    return 0.0;
                }
                let t = r / gamma;
                1.0 - 1.5 * t + 0.5 * t * t * t
            }
        }
    }

    /// `∂k/∂γ` as a function of the distance `r`. On the support boundary of
    /// the circular and spherical kernels the outside branch (0) is used.
    pub fn gamma_derivative_at(self, r: f64, gamma: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => {
                let r2 = r * r;
                r2 / (gamma * gamma) * (-r2 / gamma).exp()
            }
            KernelFamily::Exponential => r / (gamma * gamma) * (-r / gamma).exp(),
            KernelFamily::RationalQuadratic => {
                let r2 = r * r;
                r2 / ((r2 + gamma) * (r2 + gamma))
            }
            KernelFamily::Circular => {
                if r >= gamma {
                    return 0.0;
                }
                (4.0 / PI) * r / (gamma * gamma) * (1.0 - r * r / (gamma * gamma)).sqrt()
            }
            KernelFamily::Spherical => {
                if r >= gamma {
                    return 0.0;
                }
                1.5 * r / gamma.powi(4) * (gamma * gamma - r * r)
            }
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = RelationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KernelFamily::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RelationError::UnknownName(s.to_string()))
    }
}

/// A kernel family with a fixed width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    gamma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, gamma: f64) -> Result<Self, RelationError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(RelationError::InvalidGamma(gamma));
        }
        Ok(Self { family, gamma })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self, RelationError> {
        Self::new(self.family, gamma)
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<f64, RelationError> {
        Ok(self.family.value_at(euclidean(x, y)?, self.gamma))
    }

    pub fn gamma_derivative(&self, x: &[f64], y: &[f64]) -> Result<f64, RelationError> {
        Ok(self.family.gamma_derivative_at(euclidean(x, y)?, self.gamma))
    }

    /// True when `(x, y)` sits exactly on a compact-support boundary, where
    /// the derivative is a one-sided surrogate.
    pub fn on_boundary(&self, x: &[f64], y: &[f64]) -> Result<bool, RelationError> {
        Ok(self.family.has_compact_support() && euclidean(x, y)? == self.gamma)
    }
}

fn euclidean(x: &[f64], y: &[f64]) -> Result<f64, RelationError> {
    if x.len() != y.len() {
        return Err(RelationError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

pub fn kernel_value(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, RelationError> {
    spec.value(x, y)
}

pub fn kernel_gamma_derivative(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, RelationError> {
    spec.gamma_derivative(x, y)
}
