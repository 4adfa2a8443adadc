//! Domain-wall profiles ρ(x₂): exactly 1 on the perturbed side x₂ ≤ a,
//! exactly 0 on the unperturbed side x₂ ≥ b, twice continuously
//! differentiable in between. Two admissible shapes ship so invariance of
//! the interface observables under the shape choice can be tested, plus a
//! mirror-periodicized doubling for periodic boxes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WallError {
    #[error("wall endpoints must satisfy a < 0 < b (got a = {a}, b = {b})")]
    BadEndpoints { a: f64, b: f64 },
    #[error("wall [{a}, {b}] does not fit in (-{l}, {l}) with margin {margin}")]
    WallOutOfDomain { a: f64, b: f64, l: f64, margin: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallShape {
    SmoothstepQuintic,
    TanhClamped,
}

/// ρ(x₂) with exact plateaus outside (a, b).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DomainWallProfile {
    pub a: f64,
    pub b: f64,
    pub shape: WallShape,
    /// Evaluate ρ(−x₂) instead, flipping which half-plane is perturbed.
    pub mirrored: bool,
}

impl DomainWallProfile {
    pub fn new(a: f64, b: f64, shape: WallShape) -> Result<Self, WallError> {
        if !(a < 0.0 && 0.0 < b) {
            return Err(WallError::BadEndpoints { a, b });
        }
        Ok(Self {
            a,
            b,
            shape,
            mirrored: false,
        })
    }

    /// Validated against a strip half-width: both endpoints inside (−L, L)
    /// with margin ≥ 0.2·L.
    pub fn build(a: f64, b: f64, shape: WallShape, l: f64) -> Result<Self, WallError> {
        let wall = Self::new(a, b, shape)?;
        let margin = 0.2 * l;
        if a <= -l + margin || b >= l - margin {
            return Err(WallError::WallOutOfDomain { a, b, l, margin });
        }
        Ok(wall)
    }

    pub fn mirrored(mut self) -> Self {
        self.mirrored = !self.mirrored;
        self
    }

    /// The transition profile on s ∈ [0, 1], going 1 → 0.
    fn transition(&self, s: f64) -> f64 {
        match self.shape {
            WallShape::SmoothstepQuintic => {
                let rise = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
                1.0 - rise
            }
            WallShape::TanhClamped => {
                // Exponential switch with exact plateaus; tanh-like in the
                // middle but C^∞ at the clamp points.
                let f = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
                let num = f(1.0 - s);
                let den = f(s) + f(1.0 - s);
                num / den
            }
        }
    }

    pub fn rho(&self, x2: f64) -> f64 {
        let x = if self.mirrored { -x2 } else { x2 };
        if x <= self.a {
            1.0
        } else if x >= self.b {
            0.0
        } else {
            self.transition((x - self.a) / (self.b - self.a))
        }
    }

    pub fn rho_sq(&self, x2: f64) -> f64 {
        let r = self.rho(x2);
        r * r
    }

    /// Mirror-periodicized doubled wall on a torus of the given period:
    /// up–down–up, ρ̃(x) = ρ̃(period − x), so the profile is periodic and
    /// keeps its smoothness. The single wall sits in the first half period,
    /// its mirror image in the second.
    pub fn rho_mirror_periodic(&self, x2: f64, period: f64) -> f64 {
        let x = x2.rem_euclid(period);
        let folded = if x <= period / 2.0 { x } else { period - x };
        // Center the transition of the folded coordinate at period/4.
        self.rho(folded - period / 4.0)
    }

    pub fn samples(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.rho(x)).collect()
    }
}
