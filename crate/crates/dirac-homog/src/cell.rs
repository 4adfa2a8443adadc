//! Periodic cell problems on the unit torus: assemble the Hermitian matrix
//! potential W from the four real potentials V₀…V₃ and solve
//! β·ΔT_kl + W_kl = 0 (matrix corrector), β·Δt_j + V_j = 0 (scalar
//! correctors), plus the diagnostic potentials Φ_kl = ∇(Δ⁻¹ W_kl).

use crate::expr::Expr;
use crate::par;
use crate::torus::{solvability_tol, PeriodicField, PeriodicGrid, TorusError};
use num_complex::Complex64;
use serde::Serialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CellError {
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("beta must be nonzero")]
    ZeroBeta,
    #[error("potential V{index} must be real (max |Im| = {max_imag:.3e})")]
    ComplexPotential { index: usize, max_imag: f64 },
    #[error("potential V{index} has nonzero mean |{mean:.3e}| > tol {tol:.3e}; the cell problems are not solvable")]
    NonZeroMeanPotential { index: usize, mean: f64, tol: f64 },
    #[error("potentials live on different grids")]
    GridMismatch,
}

/// The four real periodic potentials (V₀, V₁, V₂, V₃) on one grid.
///
/// Construction validates realness and the mean-zero solvability condition;
/// Hölder smoothness is not checkable from samples and is carried as
/// free-text provenance only.
#[derive(Debug, Clone)]
pub struct PotentialSet {
    v: [PeriodicField; 4],
    pub hoelder_note: String,
}

impl PotentialSet {
    pub fn new(
        v0: PeriodicField,
        v1: PeriodicField,
        v2: PeriodicField,
        v3: PeriodicField,
        hoelder_note: impl Into<String>,
    ) -> Result<Self, CellError> {
        let v = [v0, v1, v2, v3];
        let grid = v[0].grid();
        for (index, field) in v.iter().enumerate() {
            if field.grid() != grid {
                return Err(CellError::GridMismatch);
            }
            let max_imag = field.max_imag();
            if max_imag > 0.0 {
                return Err(CellError::ComplexPotential { index, max_imag });
            }
            let mean = field.mean().norm();
            let tol = solvability_tol(field);
            if mean > tol {
                return Err(CellError::NonZeroMeanPotential { index, mean, tol });
            }
        }
        Ok(Self {
            v,
            hoelder_note: hoelder_note.into(),
        })
    }

    /// Sample closed-form expressions for the four potentials.
    pub fn from_exprs(
        grid: PeriodicGrid,
        exprs: &[Expr; 4],
        note: &str,
    ) -> Result<Self, CellError> {
        let sample = |e: &Expr| PeriodicField::sample_real(grid, |y1, y2| e.eval(y1, y2));
        Self::new(
            sample(&exprs[0]),
            sample(&exprs[1]),
            sample(&exprs[2]),
            sample(&exprs[3]),
            note,
        )
    }

    /// Electric-only set: V₀ = amp·cos(2πy₁), V₁ = V₂ = V₃ = 0.
    pub fn electric(grid: PeriodicGrid, amp: f64) -> Self {
        let v0 =
            PeriodicField::sample_real(grid, |y1, _| amp * (2.0 * std::f64::consts::PI * y1).cos());
        let zero = PeriodicField::zeros(grid);
        Self::new(v0, zero.clone(), zero.clone(), zero, "single cosine mode").unwrap()
    }

    /// Magnetic-only set: V₂ = amp·cos(2πy₂), V₀ = V₁ = V₃ = 0.
    pub fn magnetic(grid: PeriodicGrid, amp: f64) -> Self {
        let v2 =
            PeriodicField::sample_real(grid, |_, y2| amp * (2.0 * std::f64::consts::PI * y2).cos());
        let zero = PeriodicField::zeros(grid);
        Self::new(zero.clone(), zero.clone(), v2, zero, "single cosine mode").unwrap()
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.v[0].grid()
    }

    pub fn v(&self, j: usize) -> &PeriodicField {
        &self.v[j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = |f: &PeriodicField| f.scaled(Complex64::new(c, 0.0));
        Self {
            v: [s(&self.v[0]), s(&self.v[1]), s(&self.v[2]), s(&self.v[3])],
            hoelder_note: self.hoelder_note.clone(),
        }
    }

    /// W = [[V₀+V₃, V₁−iV₂], [V₁+iV₂, V₀−V₃]], pointwise Hermitian.
    pub fn assemble_w(&self) -> [PeriodicField; 4] {
        let i = Complex64::new(0.0, 1.0);
        let w11 = self.v[0].add(&self.v[3]);
        let w12 = self.v[1].sub(&self.v[2].scaled(i));
        let w21 = self.v[1].add(&self.v[2].scaled(i));
        let w22 = self.v[0].sub(&self.v[3]);
        [w11, w12, w21, w22]
    }
}

/// Solved cell problems: W, the matrix corrector T, the scalar correctors
/// t₁, t₂, and the diagnostic gradient potentials Φ_kl.
#[derive(Debug, Clone)]
pub struct CellSolution {
    /// Row-major entries [W₁₁, W₁₂, W₂₁, W₂₂].
    pub w: [PeriodicField; 4],
    /// Row-major entries [T₁₁, T₁₂, T₂₁, T₂₂]; mean-zero gauge.
    pub t: [PeriodicField; 4],
    pub t1: PeriodicField,
    pub t2: PeriodicField,
    pub beta: f64,
    /// Φ_kl = ∇(Δ⁻¹ W_kl), stored as (∂₁, ∂₂) pairs in row-major entry order.
    pub phi: [(PeriodicField, PeriodicField); 4],
}

/// Solve the cell problems for a validated potential set: T_kl = Δ⁻¹(−W_kl/β)
/// and t_j = Δ⁻¹(−V_j/β), all in the mean-zero gauge.
pub fn solve_cells(p: &PotentialSet, beta: f64) -> Result<CellSolution, CellError> {
    if beta == 0.0 {
        return Err(CellError::ZeroBeta);
    }
    let w = p.assemble_w();
    let inv_beta = Complex64::new(-1.0 / beta, 0.0);
    // The four T solves, the two t solves and the four Φ inversions are
    // independent; run them as one parallel job set.
    let t_res = par::par_map_indexed(4, |k| w[k].scaled(inv_beta).invert_laplacian());
    let mut t_iter = t_res.into_iter();
    let t = [
        t_iter.next().unwrap()?,
        t_iter.next().unwrap()?,
        t_iter.next().unwrap()?,
        t_iter.next().unwrap()?,
    ];
    let t1 = p.v(1).scaled(inv_beta).invert_laplacian()?;
    let t2 = p.v(2).scaled(inv_beta).invert_laplacian()?;
    let phi_res = par::par_map_indexed(4, |k| {
        w[k].invert_laplacian()
            .map(|phi_pot| phi_pot.spectral_gradient())
    });
    let mut phi_iter = phi_res.into_iter();
    let phi = [
        phi_iter.next().unwrap()?,
        phi_iter.next().unwrap()?,
        phi_iter.next().unwrap()?,
        phi_iter.next().unwrap()?,
    ];
    Ok(CellSolution {
        w,
        t,
        t1,
        t2,
        beta,
        phi,
    })
}

impl CellSolution {
    pub fn grid(&self) -> PeriodicGrid {
        self.w[0].grid()
    }

    /// Max pointwise deviation of T₁₂ = t₁ − i·t₂ and T₂₁ = t₁ + i·t₂.
    pub fn verify_t_decomposition(&self) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        let lhs12 = self.t[1].sub(&self.t1.sub(&self.t2.scaled(i)));
        let lhs21 = self.t[2].sub(&self.t1.add(&self.t2.scaled(i)));
        lhs12.max_abs().max(lhs21.max_abs())
    }

    /// Relative L² residuals ‖βΔT_kl + W_kl‖ / ‖W_kl‖ (spectral Laplacian).
    pub fn residuals(&self) -> [f64; 4] {
        let beta = Complex64::new(self.beta, 0.0);
        let mut out = [0.0f64; 4];
        for k in 0..4 {
            let lhs = self.t[k].spectral_laplacian().scaled(beta).add(&self.w[k]);
            let denom = self.w[k].l2_norm();
            out[k] = if denom == 0.0 {
                lhs.l2_norm()
            } else {
                lhs.l2_norm() / denom
            };
        }
        out
    }

    /// Relative L² error of div Φ_kl against W_kl (spectral divergence).
    pub fn phi_divergence_error(&self) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        for k in 0..4 {
            let (d1, _) = self.phi[k].0.spectral_gradient();
            let (_, d2) = self.phi[k].1.spectral_gradient();
            let div = d1.add(&d2);
            let denom = self.w[k].l2_norm();
            let err = div.sub(&self.w[k]).l2_norm();
            out[k] = if denom == 0.0 { err } else { err / denom };
        }
        out
    }

    /// Max pointwise |conj(T₁₂) − T₂₁|; zero for real potentials.
    pub fn hermitian_symmetry_defect(&self) -> f64 {
        self.t[1]
            .values()
            .iter()
            .zip(self.t[2].values().iter())
            .map(|(a, b)| (a.conj() - b).norm())
            .fold(0.0, f64::max)
    }

    /// Dump all fields as CSV plus a manifest.json with β, n and residuals.
    pub fn dump(&self, dir: &Path) -> Result<(), CellError> {
        std::fs::create_dir_all(dir).map_err(TorusError::Io)?;
        let entries = ["11", "12", "21", "22"];
        for (k, tag) in entries.iter().enumerate() {
            self.w[k].dump_csv(&dir.join(format!("W_{tag}.csv")), &format!("W_{tag}"))?;
            self.t[k].dump_csv(&dir.join(format!("T_{tag}.csv")), &format!("T_{tag}"))?;
        }
        self.t1.dump_csv(&dir.join("t_1.csv"), "t_1")?;
        self.t2.dump_csv(&dir.join("t_2.csv"), "t_2")?;
        #[derive(Serialize)]
        struct Manifest {
            beta: f64,
            n: usize,
            residuals: [f64; 4],
        }
        let manifest = Manifest {
            beta: self.beta,
            n: self.grid().n(),
            residuals: self.residuals(),
        };
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).unwrap(),
        )
        .map_err(TorusError::Io)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(32).unwrap()
    }

    #[test]
    fn w_assembly_zero() {
        let z = PeriodicField::zeros(grid());
        let p = PotentialSet::new(z.clone(), z.clone(), z.clone(), z, "zero").unwrap();
        for w in p.assemble_w() {
            assert_eq!(w.max_abs(), 0.0);
        }
    }

    #[test]
    fn w_assembly_electric_is_scalar_identity() {
        let p = PotentialSet::electric(grid(), 1.0);
        let [w11, w12, w21, w22] = p.assemble_w();
        let cosy1 = PeriodicField::sample_real(grid(), |y1, _| (2.0 * PI * y1).cos());
        assert!(w11.sub(&cosy1).max_abs() < 1e-15);
        assert!(w22.sub(&cosy1).max_abs() < 1e-15);
        assert_eq!(w12.max_abs(), 0.0);
        assert_eq!(w21.max_abs(), 0.0);
    }

    #[test]
    fn w_assembly_magnetic_is_antidiagonal() {
        let p = PotentialSet::magnetic(grid(), 1.0);
        let [w11, w12, w21, w22] = p.assemble_w();
        let i = Complex64::new(0.0, 1.0);
        let cosy2 = PeriodicField::sample_real(grid(), |_, y2| (2.0 * PI * y2).cos());
        assert_eq!(w11.max_abs(), 0.0);
        assert_eq!(w22.max_abs(), 0.0);
        assert!(w12.add(&cosy2.scaled(i)).max_abs() < 1e-15);
        assert!(w21.sub(&cosy2.scaled(i)).max_abs() < 1e-15);
    }

    #[test]
    fn rejects_complex_and_mean_shifted_potentials() {
        let z = PeriodicField::zeros(grid());
        let imag = PeriodicField::sample(grid(), |_, _| Complex64::new(0.0, 1e-3));
        assert!(matches!(
            PotentialSet::new(imag, z.clone(), z.clone(), z.clone(), ""),
            Err(CellError::ComplexPotential { index: 0, .. })
        ));
        let shifted = PeriodicField::sample_real(grid(), |y1, _| 1.0 + (2.0 * PI * y1).cos());
        assert!(matches!(
            PotentialSet::new(z.clone(), shifted, z.clone(), z, ""),
            Err(CellError::NonZeroMeanPotential { index: 1, .. })
        ));
    }

    #[test]
    fn zero_beta_is_rejected() {
        let p = PotentialSet::electric(grid(), 1.0);
        assert!(matches!(solve_cells(&p, 0.0), Err(CellError::ZeroBeta)));
    }

    #[test]
    fn electric_single_mode_closed_form() {
        let p = PotentialSet::electric(grid(), 1.0);
        let sol = solve_cells(&p, 1.0).unwrap();
        let exact =
            PeriodicField::sample_real(grid(), |y1, _| (2.0 * PI * y1).cos() / (4.0 * PI * PI));
        assert!(sol.t[0].sub(&exact).l2_norm() <= 1e-12 * exact.l2_norm());
        assert!(sol.t[3].sub(&exact).l2_norm() <= 1e-12 * exact.l2_norm());
        assert!(sol.t[1].max_abs() < 1e-15);
        assert!(sol.t[2].max_abs() < 1e-15);
        for r in sol.residuals() {
            assert!(r <= 1e-10);
        }
    }

    #[test]
    fn magnetic_single_mode_closed_form() {
        let p = PotentialSet::magnetic(grid(), 1.0);
        let sol = solve_cells(&p, 1.0).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let base =
            PeriodicField::sample_real(grid(), |_, y2| (2.0 * PI * y2).cos() / (4.0 * PI * PI));
        assert!(sol.t[1].add(&base.scaled(i)).l2_norm() < 1e-13);
        assert!(sol.t[2].sub(&base.scaled(i)).l2_norm() < 1e-13);
        assert!(sol.t2.sub(&base).l2_norm() < 1e-13);
        assert!(sol.verify_t_decomposition() < 1e-12);
    }

    #[test]
    fn beta_scaling_halves_t() {
        let p = PotentialSet::electric(grid(), 1.0);
        let s1 = solve_cells(&p, 1.0).unwrap();
        let s2 = solve_cells(&p, 2.0).unwrap();
        let diff = s2.t[0].scaled(Complex64::new(2.0, 0.0)).sub(&s1.t[0]);
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn phi_divergence_reproduces_w() {
        let p = PotentialSet::magnetic(grid(), 2.0);
        let sol = solve_cells(&p, 1.0).unwrap();
        for (k, err) in sol.phi_divergence_error().iter().enumerate() {
            if sol.w[k].l2_norm() > 0.0 {
                assert!(*err <= 1e-10, "entry {k}: {err}");
            }
        }
    }
}
