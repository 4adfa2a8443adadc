//! The effective tensor τ of the homogenized Dirac operator, computed two
//! independent ways from a solved cell problem, its Pauli decomposition, and
//! the effective masses m₊ = m, m₋ = m + β·τ₃.

use crate::cell::CellSolution;
use crate::linalg::Mat2;
use crate::torus::PeriodicField;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("effective mass {label} = {value:.3e} is below the degeneracy tolerance {tol:.1e}; the gap closes and the invariants are undefined")]
    DegenerateMass {
        label: &'static str,
        value: f64,
        tol: f64,
    },
}

/// Below this the sign of an effective mass is numerically meaningless.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// τ as assembled in the paper-facing form (1/β)∫ W σ₃ T dy: entrywise cell
/// averages of the pointwise 2×2 products, no conjugation inserted.
pub fn tau_from_wt(sol: &CellSolution) -> Mat2 {
    let n2 = (sol.grid().n() * sol.grid().n()) as f64;
    let mut acc = Mat2::zero();
    let w = &sol.w;
    let t = &sol.t;
    for idx in 0..sol.w[0].values().len() {
        let wm = Mat2::new(
            w[0].values()[idx],
            w[1].values()[idx],
            w[2].values()[idx],
            w[3].values()[idx],
        );
        let sig3t = Mat2::new(
            t[0].values()[idx],
            t[1].values()[idx],
            -t[2].values()[idx],
            -t[3].values()[idx],
        );
        acc = acc.add(&wm.mul(&sig3t));
    }
    acc.scale(Complex64::new(1.0 / (sol.beta * n2), 0.0))
}

/// Cell average of ∇a·∇b with the product taken exactly as printed (no
/// conjugation); `conj_a` switches the first factor to its conjugate for the
/// |∇T|² diagonal terms.
fn grad_product(a: &PeriodicField, b: &PeriodicField, conj_a: bool) -> Complex64 {
    let (a1, a2) = a.spectral_gradient();
    let (b1, b2) = b.spectral_gradient();
    let n2 = a.values().len() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in 0..a.values().len() {
        let (x1, x2) = if conj_a {
            (a1.values()[idx].conj(), a2.values()[idx].conj())
        } else {
            (a1.values()[idx], a2.values()[idx])
        };
        acc += x1 * b1.values()[idx] + x2 * b2.values()[idx];
    }
    acc / n2
}

/// τ from the gradient-product form
/// ∫ [[|∇T₁₁|² − ∇T₂₁∇T₁₂, ∇T₁₁∇T₁₂ − ∇T₁₂∇T₂₂],
/// [∇T₁₁∇T₂₁ − ∇T₂₁∇T₂₂, −|∇T₂₂|² + ∇T₁₂∇T₂₁]] dy,
/// used as an independent cross-check of [`tau_from_wt`].
pub fn tau_gradient_form(sol: &CellSolution) -> Mat2 {
    let [t11, t12, t21, t22] = [&sol.t[0], &sol.t[1], &sol.t[2], &sol.t[3]];
    Mat2::new(
        grad_product(t11, t11, true) - grad_product(t21, t12, false),
        grad_product(t11, t12, false) - grad_product(t12, t22, false),
        grad_product(t11, t21, false) - grad_product(t21, t22, false),
        -grad_product(t22, t22, true) + grad_product(t12, t21, false),
    )
}

/// Pauli components straight from the gradient integrals
/// (τ₀, τ₁, τ₂, τ₃); must agree with [`Mat2::pauli_components`] of the
/// assembled matrix.
pub fn pauli_from_gradients(sol: &CellSolution) -> [Complex64; 4] {
    let [t11, t12, t21, t22] = [&sol.t[0], &sol.t[1], &sol.t[2], &sol.t[3]];
    let g = |a: &PeriodicField, b: &PeriodicField| grad_product(a, b, false);
    let sq = |a: &PeriodicField| grad_product(a, a, true);
    let half = Complex64::new(0.5, 0.0);
    let tau0 = half * (sq(t11) - sq(t22));
    let tau1 = half * (g(t11, t12) + g(t11, t21) - g(t12, t22) - g(t21, t22));
    let tau2 = Complex64::new(0.0, -0.5) * (-g(t11, t12) + g(t11, t21) + g(t12, t22) - g(t21, t22));
    let tau3 = half * (sq(t11) + sq(t22) - Complex64::new(2.0, 0.0) * g(t12, t21));
    [tau0, tau1, tau2, tau3]
}

/// The effective tensor with its Pauli components, masses and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveTensor {
    /// Row-major [[re,im]; 4] entries of τ.
    pub tau: [[f64; 2]; 4],
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub m: f64,
    pub beta: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub topological_transition: bool,
    /// Largest |Im τ_c| over the four components (real for real potentials).
    pub imag_residue: f64,
    /// ‖τ − τ*‖_F.
    pub hermiticity_defect: f64,
    /// ‖tau_from_wt − tau_gradient_form‖_F.
    pub dual_form_disagreement: f64,
    /// τ = τ₀σ₀ + τ₁σ₁ + τ₂σ₂ + τ₃σ₃ reconstruction error.
    pub pauli_reconstruction_error: f64,
}

impl EffectiveTensor {
    /// Compute τ both ways from a solved cell problem and attach the masses
    /// for the bulk parameters (m, β = sol.beta).
    pub fn from_cells(sol: &CellSolution, m: f64) -> Result<Self, TensorError> {
        let tau_wt = tau_from_wt(sol);
        let tau_grad = tau_gradient_form(sol);
        let dual_form_disagreement = tau_wt.sub(&tau_grad).norm();
        let comps = tau_wt.pauli_components();
        let grad_comps = pauli_from_gradients(sol);
        let pauli_reconstruction_error = {
            let rebuilt = Mat2::from_pauli(comps[0].re, comps[1].re, comps[2].re, comps[3].re);
            let direct = Mat2::from_pauli(
                grad_comps[0].re,
                grad_comps[1].re,
                grad_comps[2].re,
                grad_comps[3].re,
            );
            rebuilt
                .sub(&tau_wt)
                .norm()
                .max(direct.sub(&tau_grad).norm())
        };
        let imag_residue = comps.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        let (m_plus, m_minus) = effective_masses(m, sol.beta, comps[3].re)?;
        Ok(Self {
            tau: [
                [tau_wt.a11.re, tau_wt.a11.im],
                [tau_wt.a12.re, tau_wt.a12.im],
                [tau_wt.a21.re, tau_wt.a21.im],
                [tau_wt.a22.re, tau_wt.a22.im],
            ],
            tau0: comps[0].re,
            tau1: comps[1].re,
            tau2: comps[2].re,
            tau3: comps[3].re,
            m,
            beta: sol.beta,
            m_plus,
            m_minus,
            topological_transition: m_plus.signum() != m_minus.signum(),
            imag_residue,
            hermiticity_defect: tau_wt.hermitian_defect(),
            dual_form_disagreement,
            pauli_reconstruction_error,
        })
    }

    /// Build a tensor directly from real Pauli components (test scenarios and
    /// synthetic models); matrix entries and masses are kept consistent.
    pub fn from_pauli(m: f64, beta: f64, comps: [f64; 4]) -> Result<Self, TensorError> {
        let [tau0, tau1, tau2, tau3] = comps;
        let mat = Mat2::from_pauli(tau0, tau1, tau2, tau3);
        let (m_plus, m_minus) = effective_masses(m, beta, tau3)?;
        Ok(Self {
            tau: [
                [mat.a11.re, mat.a11.im],
                [mat.a12.re, mat.a12.im],
                [mat.a21.re, mat.a21.im],
                [mat.a22.re, mat.a22.im],
            ],
            tau0,
            tau1,
            tau2,
            tau3,
            m,
            beta,
            m_plus,
            m_minus,
            topological_transition: m_plus.signum() != m_minus.signum(),
            imag_residue: 0.0,
            hermiticity_defect: 0.0,
            dual_form_disagreement: 0.0,
            pauli_reconstruction_error: 0.0,
        })
    }

    /// τ ≡ 0 placeholder (the unperturbed operator).
    pub fn zero(m: f64, beta: f64) -> Self {
        Self {
            tau: [[0.0; 2]; 4],
            tau0: 0.0,
            tau1: 0.0,
            tau2: 0.0,
            tau3: 0.0,
            m,
            beta,
            m_plus: m,
            m_minus: m,
            topological_transition: false,
            imag_residue: 0.0,
            hermiticity_defect: 0.0,
            dual_form_disagreement: 0.0,
            pauli_reconstruction_error: 0.0,
        }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(self.tau[0][0], self.tau[0][1]),
            Complex64::new(self.tau[1][0], self.tau[1][1]),
            Complex64::new(self.tau[2][0], self.tau[2][1]),
            Complex64::new(self.tau[3][0], self.tau[3][1]),
        )
    }
}

/// (m₊, m₋) = (m, m + β·τ₃), rejecting numerically degenerate masses.
pub fn effective_masses(m: f64, beta: f64, tau3: f64) -> Result<(f64, f64), TensorError> {
    let m_minus = m + beta * tau3;
    if m.abs() < DEGENERACY_TOL {
        return Err(TensorError::DegenerateMass {
            label: "m_plus",
            value: m,
            tol: DEGENERACY_TOL,
        });
    }
    if m_minus.abs() < DEGENERACY_TOL {
        return Err(TensorError::DegenerateMass {
            label: "m_minus",
            value: m_minus,
            tol: DEGENERACY_TOL,
        });
    }
    Ok((m, m_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{solve_cells, PotentialSet};
    use crate::torus::PeriodicGrid;
    use std::f64::consts::PI;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(64).unwrap()
    }

    #[test]
    fn zero_potential_gives_zero_tau() {
        let zero = crate::torus::PeriodicField::zeros(grid());
        let p = PotentialSet::new(zero.clone(), zero.clone(), zero.clone(), zero, "").unwrap();
        let sol = solve_cells(&p, 1.0).unwrap();
        assert!(tau_from_wt(&sol).norm() == 0.0);
        assert!(tau_gradient_form(&sol).norm() == 0.0);
    }

    #[test]
    fn electric_unit_amplitude_tau3() {
        let p = PotentialSet::electric(grid(), 1.0);
        let sol = solve_cells(&p, 1.0).unwrap();
        let tau = tau_from_wt(&sol);
        let expect = 1.0 / (8.0 * PI * PI);
        assert!((tau.a11.re - expect).abs() < 1e-12);
        assert!((tau.a22.re + expect).abs() < 1e-12);
        assert!(tau.a12.norm() < 1e-14 && tau.a21.norm() < 1e-14);
        let t = EffectiveTensor::from_cells(&sol, 1.0).unwrap();
        assert!((t.tau3 - expect).abs() < 1e-12);
        assert!(t.tau0.abs() < 1e-13 && t.tau1.abs() < 1e-13 && t.tau2.abs() < 1e-13);
        assert!(t.tau3 > 0.0);
    }

    #[test]
    fn magnetic_unit_amplitude_tau3() {
        let p = PotentialSet::magnetic(grid(), 1.0);
        let sol = solve_cells(&p, 1.0).unwrap();
        let t = EffectiveTensor::from_cells(&sol, 1.0).unwrap();
        let expect = -1.0 / (8.0 * PI * PI);
        assert!((t.tau3 - expect).abs() < 1e-12, "tau3 = {}", t.tau3);
        assert!(t.tau0.abs() < 1e-13 && t.tau1.abs() < 1e-13 && t.tau2.abs() < 1e-13);
        assert!(t.tau3 < 0.0);
    }

    #[test]
    fn dual_forms_agree_on_examples() {
        for p in [
            PotentialSet::electric(grid(), 2.0),
            PotentialSet::magnetic(grid(), 1.5),
        ] {
            let sol = solve_cells(&p, 1.3).unwrap();
            let d = tau_from_wt(&sol).sub(&tau_gradient_form(&sol)).norm();
            assert!(d < 1e-10, "disagreement {d}");
        }
    }

    #[test]
    fn pauli_basis_sanity() {
        let sigma3 = Mat2::from_pauli(0.0, 0.0, 0.0, 1.0);
        let c = sigma3.pauli_components();
        assert!((c[3].re - 1.0).abs() < 1e-15);
        assert!(c[0].norm() < 1e-15 && c[1].norm() < 1e-15 && c[2].norm() < 1e-15);
    }

    #[test]
    fn transition_scenario_masses() {
        // V0 = 4cos(2πy1) scales tau3 by 16: tau3 = 2/π².
        let p = PotentialSet::electric(grid(), 4.0);
        let sol = solve_cells(&p, 1.0).unwrap();
        let t = EffectiveTensor::from_cells(&sol, -0.05).unwrap();
        let expect_tau3 = 2.0 / (PI * PI);
        assert!((t.tau3 - expect_tau3).abs() < 1e-12);
        assert!((t.m_minus - (-0.05 + expect_tau3)).abs() < 1e-12);
        assert!((t.m_minus - 0.15264).abs() < 5e-6);
        assert!(t.topological_transition);

        let unit = solve_cells(&PotentialSet::electric(grid(), 1.0), 1.0).unwrap();
        let t2 = EffectiveTensor::from_cells(&unit, 1.0).unwrap();
        assert!((t2.m_minus - 1.0126651).abs() < 1e-6);
        assert!(!t2.topological_transition);
    }

    #[test]
    fn degenerate_mass_is_rejected() {
        assert!(matches!(
            effective_masses(1e-9, 1.0, 0.0),
            Err(TensorError::DegenerateMass {
                label: "m_plus",
                ..
            })
        ));
        assert!(matches!(
            effective_masses(-0.1, 1.0, 0.1),
            Err(TensorError::DegenerateMass {
                label: "m_minus",
                ..
            })
        ));
    }

    #[test]
    fn tau3_zero_keeps_masses_equal() {
        let (mp, mm) = effective_masses(0.7, 2.0, 0.0).unwrap();
        assert_eq!(mp, mm);
    }
}
