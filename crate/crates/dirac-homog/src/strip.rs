//! Hermitian discretization of the interface Hamiltonian at fixed ξ₁ on a
//! finite x₂ interval with Dirichlet truncation:
//!
//!   Ĥ(ξ₁, x₂) = (ξ₁ + βρ²τ₁)σ₁ + (D₂ + βρ²τ₂)σ₂
//!             + (m + β(∂₂² − ξ₁²) + βρ²τ₃)σ₃ + βρ²τ₀σ₀,
//!
//! with 4th-order central differences for ∂₂ and ∂₂². The matrix is banded
//! (5 super-diagonals in spinor-interleaved ordering), so in-gap eigenpairs
//! come from the banded solver at O(kd·n²) cost per momentum.

use crate::linalg::{HermitianBand, LinalgError};
use crate::tensor::EffectiveTensor;
use crate::wall::DomainWallProfile;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StripError {
    #[error("insufficient transverse resolution: β/h² = {stiffness:.3e} must be at least 10× the largest zeroth-order coefficient {coeff:.3e}")]
    InsufficientResolution { stiffness: f64, coeff: f64 },
    #[error("strip needs at least 16 interior points (got {0})")]
    TooFewPoints(usize),
    #[error(transparent)]
    Eig(#[from] LinalgError),
}

/// Interface model parameters: mass, regularization and the Pauli components
/// of the effective tensor switched on by ρ².
#[derive(Debug, Clone, Copy)]
pub struct InterfaceModel {
    pub m: f64,
    pub beta: f64,
    pub tau: [f64; 4],
}

impl InterfaceModel {
    pub fn new(m: f64, beta: f64, tau: [f64; 4]) -> Self {
        Self { m, beta, tau }
    }

    pub fn from_tensor(t: &EffectiveTensor) -> Self {
        Self {
            m: t.m,
            beta: t.beta,
            tau: [t.tau0, t.tau1, t.tau2, t.tau3],
        }
    }

    /// Mass on the unperturbed side (ρ = 0).
    pub fn m_plus(&self) -> f64 {
        self.m
    }

    /// Mass on the perturbed side (ρ = 1).
    pub fn m_minus(&self) -> f64 {
        self.m + self.beta * self.tau[3]
    }
}

/// Discretized strip Hamiltonian at one ξ₁.
pub struct StripOperator {
    pub xi1: f64,
    pub l: f64,
    pub n: usize,
    matrix: HermitianBand,
    nodes: Vec<f64>,
}

impl StripOperator {
    /// Interior grid spacing for half-width `l` and `n` interior points.
    pub fn spacing(l: f64, n: usize) -> f64 {
        2.0 * l / (n + 1) as f64
    }

    /// Assemble the banded Hermitian matrix. `wall` may be `None` for the
    /// translation-invariant sanity limits ρ ≡ 0 / ρ ≡ 1 via `rho_const`.
    pub fn build(
        xi1: f64,
        model: &InterfaceModel,
        wall: Option<&DomainWallProfile>,
        rho_const: f64,
        l: f64,
        n: usize,
    ) -> Result<Self, StripError> {
        if n < 16 {
            return Err(StripError::TooFewPoints(n));
        }
        let h = Self::spacing(l, n);
        let nodes: Vec<f64> = (0..n).map(|j| -l + (j as f64 + 1.0) * h).collect();
        let rho_sq: Vec<f64> = nodes
            .iter()
            .map(|&x| match wall {
                Some(w) => w.rho_sq(x),
                None => rho_const * rho_const,
            })
            .collect();
        let beta = model.beta;
        let [tau0, tau1, tau2, tau3] = model.tau;
        // Resolution guard: the β∂₂² term must dominate the grid scale.
        let coeff_max = rho_sq
            .iter()
            .map(|&r| {
                (model.m - beta * xi1 * xi1 + beta * r * tau3).abs()
                    + (beta * r * tau0).abs()
                    + (xi1 + beta * r * tau1).abs()
                    + (beta * r * tau2).abs()
            })
            .fold(0.0, f64::max);
        let stiffness = beta.abs() / (h * h);
        if stiffness < 10.0 * coeff_max {
            return Err(StripError::InsufficientResolution {
                stiffness,
                coeff: coeff_max,
            });
        }

        // Spinor-interleaved index p = 2j + s, bandwidth 2·2 + 1.
        let mut mat = HermitianBand::zeros(2 * n, 5);
        let inv_12h = 1.0 / (12.0 * h);
        let inv_12h2 = 1.0 / (12.0 * h * h);
        // 4th-order stencils; Dirichlet = zero extension beyond the interval.
        let d1 = [(1i64, 8.0 * inv_12h), (2, -inv_12h)]; // antisymmetric part
        let d2_diag = -30.0 * inv_12h2;
        let d2 = [(1i64, 16.0 * inv_12h2), (2, -inv_12h2)];

        for j in 0..n {
            let r = rho_sq[j];
            let mass = model.m - beta * xi1 * xi1 + beta * r * tau3;
            let c1 = xi1 + beta * r * tau1; // σ₁ coefficient
            let c2 = beta * r * tau2; // σ₂ multiplication part
            let c0 = beta * r * tau0; // σ₀ coefficient
            let p1 = 2 * j;
            let p2 = 2 * j + 1;
            // σ₃·(mass + β∂₂²) diagonal blocks.
            let diag3 = mass + beta * d2_diag;
            mat.add(p1, p1, Complex64::new(c0 + diag3, 0.0));
            mat.add(p2, p2, Complex64::new(c0 - diag3, 0.0));
            // σ₁ and σ₂ multiplication parts couple the spinor on-site:
            // block12 = c1 − i·c2.
            mat.add(p1, p2, Complex64::new(c1, -c2));
            // Off-site couplings.
            for (off, w1) in d1 {
                let jn = j as i64 + off;
                if jn >= 0 && (jn as usize) < n {
                    let jn = jn as usize;
                    if jn > j {
                        // D₂σ₂ = (1/i)∂₂σ₂: block12 gets −∂₂, block21 gets +∂₂
                        // with the antisymmetric stencil (forward coefficient +w1).
                        mat.add(p1, 2 * jn + 1, Complex64::new(-w1, 0.0));
                        mat.add(p2, 2 * jn, Complex64::new(w1, 0.0));
                    }
                }
            }
            for (off, w2) in d2 {
                let jn = j as i64 + off;
                if jn >= 0 && (jn as usize) < n {
                    let jn = jn as usize;
                    if jn > j {
                        let v = beta * w2;
                        mat.add(p1, 2 * jn, Complex64::new(v, 0.0));
                        mat.add(p2, 2 * jn + 1, Complex64::new(-v, 0.0));
                    }
                }
            }
        }
        Ok(Self {
            xi1,
            l,
            n,
            matrix: mat,
            nodes,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn matrix(&self) -> &HermitianBand {
        &self.matrix
    }

    /// Eigenvalues in (lo, hi], ascending.
    pub fn eigvals_in(&self, lo: f64, hi: f64) -> Result<Vec<f64>, StripError> {
        Ok(self.matrix.eigvals_in(lo, hi)?)
    }

    /// Eigenpairs in (lo, hi] with spinor-interleaved eigenvectors.
    pub fn eigpairs_in(
        &self,
        lo: f64,
        hi: f64,
    ) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), StripError> {
        Ok(self.matrix.eigpairs_in(lo, hi)?)
    }

    /// Fraction of |ψ|² mass inside the window [lo, hi] of x₂.
    pub fn localization_score(&self, vec: &[Complex64], lo: f64, hi: f64) -> f64 {
        let mut inside = 0.0;
        let mut total = 0.0;
        for (j, &x) in self.nodes.iter().enumerate() {
            let w = vec[2 * j].norm_sqr() + vec[2 * j + 1].norm_sqr();
            total += w;
            if x >= lo && x <= hi {
                inside += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            inside / total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh_dense;

    fn model_unit() -> InterfaceModel {
        InterfaceModel::new(-0.5, 1.0, [0.0, 0.0, 0.0, 1.0])
    }

    #[test]
    fn matrix_is_hermitian_by_construction() {
        let wall =
            DomainWallProfile::new(-1.0, 1.0, crate::wall::WallShape::SmoothstepQuintic).unwrap();
        let op = StripOperator::build(0.7, &model_unit(), Some(&wall), 0.0, 8.0, 128).unwrap();
        let dense = op.matrix().to_dense();
        let n = 2 * op.n;
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = (dense[i + j * n] - dense[j + i * n].conj()).norm();
                defect = defect.max(d);
            }
        }
        assert!(defect < 1e-12);
    }

    #[test]
    fn banded_strip_matches_dense_eigs() {
        let wall =
            DomainWallProfile::new(-1.0, 1.0, crate::wall::WallShape::SmoothstepQuintic).unwrap();
        let op = StripOperator::build(0.3, &model_unit(), Some(&wall), 0.0, 8.0, 48).unwrap();
        let mut dense = op.matrix().to_dense();
        let (w_all, _) = eigh_dense(&mut dense, 2 * op.n).unwrap();
        let w_window: Vec<f64> = w_all
            .iter()
            .cloned()
            .filter(|&x| x > -0.6 && x <= 0.6)
            .collect();
        let w_band = op.eigvals_in(-0.6, 0.6).unwrap();
        assert_eq!(w_band.len(), w_window.len());
        for (a, b) in w_band.iter().zip(w_window.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn resolution_guard_triggers() {
        // Huge ξ₁ drives the σ₃ coefficient above the β/h² stiffness.
        let err = StripOperator::build(80.0, &model_unit(), None, 0.0, 10.0, 64);
        assert!(matches!(
            err,
            Err(StripError::InsufficientResolution { .. })
        ));
    }

    #[test]
    fn bulk_limit_has_no_ingap_states() {
        // ρ ≡ 0: the unperturbed strip; gap edge |m| = 0.5 at ξ₁ = 0.
        let op = StripOperator::build(0.0, &model_unit(), None, 0.0, 12.0, 256).unwrap();
        let vals = op.eigvals_in(-0.49, 0.49).unwrap();
        assert!(vals.is_empty(), "unexpected in-gap states {vals:?}");
    }
}
