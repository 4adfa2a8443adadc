//! Uniform-grid periodic scalar fields on the unit cell Y = [0,1]² with
//! spectral calculus: gradients, Laplacian inversion, inner products.
//!
//! Fields are stored as complex samples in row-major order with y₁ fastest
//! (index = j₂·n + j₁), matching the CSV dump layout. All derivatives and
//! inversions act through the 2D FFT, so they are exact on band-limited data.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("grid size {0} must be even and at least 8")]
    BadGridSize(usize),
    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),
    #[error("right-hand side has nonzero mean |{mean:.3e}| > tol {tol:.3e}; Δu = rhs is not solvable on the torus")]
    NonZeroMean { mean: f64, tol: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Uniform n×n grid on the unit torus, nodes y_j = j/n (no duplicated endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self, TorusError> {
        if n < 8 || n % 2 != 0 {
            return Err(TorusError::BadGridSize(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Node coordinate (y₁, y₂) for indices (j₁, j₂).
    pub fn node(&self, j1: usize, j2: usize) -> (f64, f64) {
        (j1 as f64 / self.n as f64, j2 as f64 / self.n as f64)
    }

    /// Signed integer wavenumber for FFT bin `j` (Nyquist kept positive).
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }
}

/// Complex scalar samples on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: PeriodicGrid,
    values: Vec<Complex64>,
}

impl PeriodicField {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n() * grid.n()],
        }
    }

    /// Sample a closed-form function of (y₁, y₂) at the grid nodes.
    pub fn sample(grid: PeriodicGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for j2 in 0..n {
            for j1 in 0..n {
                let (y1, y2) = grid.node(j1, j2);
                values.push(f(y1, y2));
            }
        }
        Self { grid, values }
    }

    pub fn sample_real(grid: PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::sample(grid, |y1, y2| Complex64::new(f(y1, y2), 0.0))
    }

    pub fn from_values(grid: PeriodicGrid, values: Vec<Complex64>) -> Self {
        assert_eq!(
            values.len(),
            grid.n() * grid.n(),
            "value array length must be n²"
        );
        Self { grid, values }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn at(&self, j1: usize, j2: usize) -> Complex64 {
        self.values[j2 * self.grid.n() + j1]
    }

    /// Exact average of the samples.
    pub fn mean(&self) -> Complex64 {
        let sum: Complex64 = self.values.iter().sum();
        sum / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max pointwise |imaginary part|.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// L² inner product ⟨f, g⟩ = (1/n²) Σ f_j · conj(g_j).
    pub fn l2_inner(&self, other: &Self) -> Result<Complex64, TorusError> {
        if self.grid != other.grid {
            return Err(TorusError::GridMismatch(self.grid.n(), other.grid.n()));
        }
        let sum: Complex64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(f, g)| f * g.conj())
            .sum();
        Ok(sum / self.values.len() as f64)
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (s / self.values.len() as f64).sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul_pointwise(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Fourier coefficients c_k with f(y) = Σ c_k e^{2πi k·y}; same layout as
    /// the samples, bin (j₁, j₂) ↦ wavenumbers (k₁, k₂) via [`PeriodicGrid::wavenumber`].
    pub fn fourier_coefficients(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        fft2_forward(self.grid.n(), &mut buf);
        let norm = 1.0 / (self.values.len() as f64);
        for v in buf.iter_mut() {
            *v *= norm;
        }
        buf
    }

    /// Inverse of [`Self::fourier_coefficients`]: samples f(y_j) = Σ c_k e^{2πik·y_j}.
    pub fn from_fourier(grid: PeriodicGrid, mut coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.n() * grid.n());
        fft2_inverse_raw(grid.n(), &mut coeffs);
        Self {
            grid,
            values: coeffs,
        }
    }

    /// Spectral partial derivatives (∂y₁, ∂y₂). The Nyquist derivative mode
    /// is zeroed so differentiation maps real fields to real fields.
    pub fn spectral_gradient(&self) -> (Self, Self) {
        let n = self.grid.n();
        let coeffs = self.fourier_coefficients();
        let mut d1 = coeffs.clone();
        let mut d2 = coeffs;
        let nyq = (n / 2) as i64;
        for j2 in 0..n {
            let k2 = self.grid.wavenumber(j2);
            for j1 in 0..n {
                let k1 = self.grid.wavenumber(j1);
                let idx = j2 * n + j1;
                let m1 = if k1 == nyq { 0.0 } else { 2.0 * PI * k1 as f64 };
                let m2 = if k2 == nyq { 0.0 } else { 2.0 * PI * k2 as f64 };
                d1[idx] *= Complex64::new(0.0, m1);
                d2[idx] *= Complex64::new(0.0, m2);
            }
        }
        (
            Self::from_fourier(self.grid, d1),
            Self::from_fourier(self.grid, d2),
        )
    }

    /// Spectral Laplacian Δf (all modes, Nyquist included).
    pub fn spectral_laplacian(&self) -> Self {
        let n = self.grid.n();
        let mut coeffs = self.fourier_coefficients();
        for j2 in 0..n {
            let k2 = self.grid.wavenumber(j2) as f64;
            for j1 in 0..n {
                let k1 = self.grid.wavenumber(j1) as f64;
                coeffs[j2 * n + j1] *= -4.0 * PI * PI * (k1 * k1 + k2 * k2);
            }
        }
        Self::from_fourier(self.grid, coeffs)
    }

    /// Unique mean-zero solution of Δu = rhs. Errors with [`TorusError::NonZeroMean`]
    /// when |mean(rhs)| exceeds `1e-10·max|rhs|` — the solvability condition on
    /// the torus is validated, never silently projected away.
    pub fn invert_laplacian(&self) -> Result<Self, TorusError> {
        let mean = self.mean().norm();
        let tol = solvability_tol(self);
        if mean > tol {
            return Err(TorusError::NonZeroMean { mean, tol });
        }
        let n = self.grid.n();
        let mut coeffs = self.fourier_coefficients();
        for j2 in 0..n {
            let k2 = self.grid.wavenumber(j2) as f64;
            for j1 in 0..n {
                let k1 = self.grid.wavenumber(j1) as f64;
                let idx = j2 * n + j1;
                let k_sq = k1 * k1 + k2 * k2;
                if k_sq == 0.0 {
                    coeffs[idx] = Complex64::new(0.0, 0.0);
                } else {
                    coeffs[idx] /= -4.0 * PI * PI * k_sq;
                }
            }
        }
        Ok(Self::from_fourier(self.grid, coeffs))
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point (periodic).
    /// Exact for band-limited fields. For many evaluations build a
    /// [`TrigInterp`] once instead.
    pub fn trig_eval(&self, y1: f64, y2: f64) -> Complex64 {
        TrigInterp::new(self).eval(y1, y2)
    }

    /// Resample onto an m×m grid by Fourier zero-padding / truncation.
    pub fn resample(&self, m: usize) -> Result<Self, TorusError> {
        let target = PeriodicGrid::new(m)?;
        let n = self.grid.n();
        let coeffs = self.fourier_coefficients();
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        let half = (n.min(m) / 2) as i64;
        for j2 in 0..n {
            let k2 = self.grid.wavenumber(j2);
            if k2.abs() >= half && m < n {
                continue;
            }
            for j1 in 0..n {
                let k1 = self.grid.wavenumber(j1);
                if k1.abs() >= half && m < n {
                    continue;
                }
                let t1 = k1.rem_euclid(m as i64) as usize;
                let t2 = k2.rem_euclid(m as i64) as usize;
                out[t2 * m + t1] = coeffs[j2 * n + j1];
            }
        }
        Ok(Self::from_fourier(target, out))
    }

    /// Write the samples as CSV (`y1,y2,re,im`, rows ordered by y₂ then y₁)
    /// next to a JSON sidecar `{n, description}`.
    pub fn dump_csv(&self, path: &Path, description: &str) -> Result<(), TorusError> {
        let n = self.grid.n();
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "y1,y2,re,im")?;
        for j2 in 0..n {
            for j1 in 0..n {
                let (y1, y2) = self.grid.node(j1, j2);
                let v = self.at(j1, j2);
                writeln!(file, "{y1},{y2},{},{}", v.re, v.im)?;
            }
        }
        #[derive(Serialize)]
        struct Sidecar<'a> {
            n: usize,
            description: &'a str,
        }
        let sidecar = Sidecar { n, description };
        let json_path = path.with_extension("json");
        std::fs::write(json_path, serde_json::to_string_pretty(&sidecar).unwrap())?;
        Ok(())
    }
}

/// Solvability threshold for Δu = rhs: `1e-10·max|rhs|`.
pub fn solvability_tol(rhs: &PeriodicField) -> f64 {
    1e-10 * rhs.max_abs()
}

/// Precomputed Fourier coefficients of a field, for repeated off-grid
/// evaluation. The sum is separable in the two axes, cost O(n) per point
/// after an O(n²) setup per y₂-row is amortized away by evaluating the
/// full double sum directly per point (still O(n²), but FFT-free).
pub struct TrigInterp {
    n: usize,
    coeffs: Vec<Complex64>,
    wavenumbers: Vec<f64>,
}

impl TrigInterp {
    pub fn new(field: &PeriodicField) -> Self {
        let n = field.grid().n();
        let wavenumbers = (0..n).map(|j| field.grid().wavenumber(j) as f64).collect();
        Self {
            n,
            coeffs: field.fourier_coefficients(),
            wavenumbers,
        }
    }

    pub fn eval(&self, y1: f64, y2: f64) -> Complex64 {
        let n = self.n;
        let phase1: Vec<Complex64> = self
            .wavenumbers
            .iter()
            .map(|&k| Complex64::from_polar(1.0, 2.0 * PI * k * y1))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for j2 in 0..n {
            let p2 = Complex64::from_polar(1.0, 2.0 * PI * self.wavenumbers[j2] * y2);
            let mut row = Complex64::new(0.0, 0.0);
            for j1 in 0..n {
                row += self.coeffs[j2 * n + j1] * phase1[j1];
            }
            acc += row * p2;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// 2D FFT plumbing (rustfft rows + transpose)
// ---------------------------------------------------------------------------

fn plan(n: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
    let mut planner = FftPlanner::new();
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

fn transpose_square(n: usize, buf: &mut [Complex64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2_with(n: usize, buf: &mut [Complex64], fft: &Arc<dyn rustfft::Fft<f64>>) {
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    transpose_square(n, buf);
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    transpose_square(n, buf);
}

pub(crate) fn fft2_forward(n: usize, buf: &mut [Complex64]) {
    fft2_with(n, buf, &plan(n, true));
}

/// Unnormalized inverse: exact inverse of `fft2_forward` up to the n² factor,
/// i.e. the synthesis sum Σ c_k e^{+2πik·y}.
pub(crate) fn fft2_inverse_raw(n: usize, buf: &mut [Complex64]) {
    fft2_with(n, buf, &plan(n, false));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(PeriodicGrid::new(7).is_err());
        assert!(PeriodicGrid::new(6).is_err());
        assert!(PeriodicGrid::new(9).is_err());
        assert!(PeriodicGrid::new(8).is_ok());
    }

    #[test]
    fn sample_zero_is_zero() {
        let f = PeriodicField::sample_real(grid(8), |_, _| 0.0);
        assert_eq!(f.max_abs(), 0.0);
        assert_eq!(f.mean(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cosine_rows_repeat() {
        let f = PeriodicField::sample_real(grid(8), |y1, _| (2.0 * PI * y1).cos());
        for j2 in 1..8 {
            for j1 in 0..8 {
                assert_eq!(f.at(j1, j2), f.at(j1, 0));
            }
        }
    }

    #[test]
    fn product_of_zero_mean_modes_has_zero_mean() {
        let f = PeriodicField::sample_real(grid(16), |y1, y2| {
            (2.0 * PI * y1).cos() * (2.0 * PI * y2).cos()
        });
        assert!(f.mean().norm() < 1e-15);
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let f = PeriodicField::sample_real(grid(16), |_, _| 3.5);
        let (d1, d2) = f.spectral_gradient();
        assert!(d1.max_abs() < 1e-13);
        assert!(d2.max_abs() < 1e-13);
    }

    #[test]
    fn gradient_of_resolved_modes_is_analytic() {
        let g = grid(32);
        let f = PeriodicField::sample_real(g, |y1, _| (2.0 * PI * y1).cos());
        let (d1, d2) = f.spectral_gradient();
        let exact = PeriodicField::sample_real(g, |y1, _| -2.0 * PI * (2.0 * PI * y1).sin());
        assert!(d1.sub(&exact).l2_norm() <= 1e-12 * exact.l2_norm());
        assert!(d2.max_abs() < 1e-12);

        let f = PeriodicField::sample_real(g, |_, y2| (4.0 * PI * y2).sin());
        let (d1, d2) = f.spectral_gradient();
        let exact = PeriodicField::sample_real(g, |_, y2| 4.0 * PI * (4.0 * PI * y2).cos());
        assert!(d2.sub(&exact).l2_norm() <= 1e-12 * exact.l2_norm());
        assert!(d1.max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_inverse_single_mode() {
        let g = grid(32);
        let rhs = PeriodicField::sample_real(g, |y1, _| (2.0 * PI * y1).cos());
        let u = rhs.invert_laplacian().unwrap();
        let exact = PeriodicField::sample_real(g, |y1, _| -(2.0 * PI * y1).cos() / (4.0 * PI * PI));
        assert!(u.sub(&exact).l2_norm() <= 1e-12 * exact.l2_norm());
        assert!(u.mean().norm() < 1e-16);
    }

    #[test]
    fn laplacian_inverse_zero_rhs() {
        let u = PeriodicField::zeros(grid(8)).invert_laplacian().unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn laplacian_rejects_nonzero_mean() {
        let rhs = PeriodicField::sample_real(grid(8), |_, _| 1.0);
        match rhs.invert_laplacian() {
            Err(TorusError::NonZeroMean { .. }) => {}
            other => panic!("expected NonZeroMean, got {other:?}"),
        }
    }

    #[test]
    fn inner_products_match_analytic_integrals() {
        let g = grid(32);
        let one = PeriodicField::sample_real(g, |_, _| 1.0);
        let c = PeriodicField::sample_real(g, |y1, _| (2.0 * PI * y1).cos());
        let s = PeriodicField::sample_real(g, |y1, _| (2.0 * PI * y1).sin());
        assert!((one.l2_inner(&one).unwrap().re - 1.0).abs() < 1e-14);
        assert!((c.l2_inner(&c).unwrap().re - 0.5).abs() < 1e-14);
        assert!(c.l2_inner(&s).unwrap().norm() < 1e-14);
    }

    #[test]
    fn inner_product_grid_mismatch() {
        let a = PeriodicField::zeros(grid(8));
        let b = PeriodicField::zeros(grid(16));
        assert!(matches!(
            a.l2_inner(&b),
            Err(TorusError::GridMismatch(8, 16))
        ));
    }

    #[test]
    fn invert_then_laplacian_recovers_rhs() {
        let g = grid(32);
        let rhs = PeriodicField::sample_real(g, |y1, y2| {
            (2.0 * PI * y1).cos() * (4.0 * PI * y2).sin() + 0.3 * (6.0 * PI * (y1 + y2)).cos()
        });
        let u = rhs.invert_laplacian().unwrap();
        let back = u.spectral_laplacian();
        assert!(back.sub(&rhs).l2_norm() <= 1e-10 * rhs.l2_norm());
    }

    #[test]
    fn trig_eval_matches_closed_form_off_grid() {
        let g = grid(16);
        let f = PeriodicField::sample_real(g, |y1, y2| {
            (2.0 * PI * y1).cos() + 0.5 * (2.0 * PI * y2).sin()
        });
        let y = (0.137, 0.731);
        let exact = (2.0 * PI * y.0).cos() + 0.5 * (2.0 * PI * y.1).sin();
        assert!((f.trig_eval(y.0, y.1).re - exact).abs() < 1e-12);
    }

    #[test]
    fn resample_preserves_band_limited_fields() {
        let f = PeriodicField::sample_real(grid(32), |y1, y2| {
            (2.0 * PI * y1).cos() * (2.0 * PI * y2).cos()
        });
        let up = f.resample(48).unwrap();
        let exact = PeriodicField::sample_real(grid(48), |y1, y2| {
            (2.0 * PI * y1).cos() * (2.0 * PI * y2).cos()
        });
        assert!(up.sub(&exact).l2_norm() < 1e-12);
    }
}
