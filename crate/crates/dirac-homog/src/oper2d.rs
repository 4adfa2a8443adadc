//! Matrix-free discretization of the oscillatory and homogenized Dirac
//! operators on a periodic 2D box: the constant-coefficient part
//! D·σ + (m + βΔ)σ₃ is applied spectrally, zeroth-order matrix potentials
//! pointwise. Domain walls on the torus use the mirror-periodicized doubled
//! profile so the coefficients stay periodic and W^{2,∞}.

use crate::cell::PotentialSet;
use crate::linalg::{Mat2, SIGMA_3};
use crate::tensor::EffectiveTensor;
use crate::torus::{fft2_forward, fft2_inverse_raw};
use crate::wall::DomainWallProfile;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Oper2dError {
    #[error("epsilon = {eps} is not commensurate with the box: need eps = L/k for integer k with N a multiple of 8k (L = {l}, N = {n})")]
    IncommensurateEpsilon { eps: f64, l: f64, n: usize },
    #[error("box grid size {0} must be even and at least 8")]
    BadGridSize(usize),
    #[error(transparent)]
    Torus(#[from] crate::torus::TorusError),
}

/// Periodic square box of side `l` with `n` points per axis (x_j = j·l/n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxGrid {
    pub l: f64,
    pub n: usize,
}

impl BoxGrid {
    pub fn new(l: f64, n: usize) -> Result<Self, Oper2dError> {
        if n < 8 || n % 2 != 0 {
            return Err(Oper2dError::BadGridSize(n));
        }
        Ok(Self { l, n })
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn node(&self, j1: usize, j2: usize) -> (f64, f64) {
        (
            j1 as f64 * self.l / self.n as f64,
            j2 as f64 * self.l / self.n as f64,
        )
    }

    fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Physical wavenumber 2π·j/L of FFT bin j.
    pub fn k_phys(&self, j: usize) -> f64 {
        2.0 * PI * self.wavenumber(j) as f64 / self.l
    }

    /// Cell area element for discrete L² integrals.
    pub fn weight(&self) -> f64 {
        (self.l / self.n as f64).powi(2)
    }
}

/// Two-component spinor field on a [`BoxGrid`], components stored as separate
/// planes in row-major (x₁ fastest) order.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub grid: BoxGrid,
    pub up: Vec<Complex64>,
    pub dn: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(grid: BoxGrid) -> Self {
        let len = grid.n * grid.n;
        Self {
            grid,
            up: vec![Complex64::new(0.0, 0.0); len],
            dn: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn sample(grid: BoxGrid, f: impl Fn(f64, f64) -> (Complex64, Complex64)) -> Self {
        let n = grid.n;
        let mut up = Vec::with_capacity(n * n);
        let mut dn = Vec::with_capacity(n * n);
        for j2 in 0..n {
            for j1 in 0..n {
                let (x1, x2) = grid.node(j1, j2);
                let (a, b) = f(x1, x2);
                up.push(a);
                dn.push(b);
            }
        }
        Self { grid, up, dn }
    }

    /// Periodicized Gaussian bump, polarized on the first component.
    pub fn gaussian_bump(grid: BoxGrid, center: (f64, f64), width: f64) -> Self {
        let l = grid.l;
        Self::sample(grid, |x1, x2| {
            let mut acc = 0.0;
            // Wrap images so the bump is exactly periodic to machine precision.
            for w1 in -2..=2 {
                for w2 in -2..=2 {
                    let d1 = x1 - center.0 + w1 as f64 * l;
                    let d2 = x2 - center.1 + w2 as f64 * l;
                    acc += (-(d1 * d1 + d2 * d2) / (2.0 * width * width)).exp();
                }
            }
            (Complex64::new(acc, 0.0), Complex64::new(0.0, 0.0))
        })
    }

    /// Random band-limited spinor with |k| ≤ k_max modes, seeded.
    pub fn random_band_limited(grid: BoxGrid, k_max: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n;
        let mut up_hat = vec![Complex64::new(0.0, 0.0); n * n];
        let mut dn_hat = vec![Complex64::new(0.0, 0.0); n * n];
        for j2 in 0..n {
            let k2 = grid.wavenumber(j2);
            for j1 in 0..n {
                let k1 = grid.wavenumber(j1);
                if k1.abs() <= k_max && k2.abs() <= k_max {
                    let idx = j2 * n + j1;
                    up_hat[idx] =
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    dn_hat[idx] =
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                }
            }
        }
        fft2_inverse_raw(n, &mut up_hat);
        fft2_inverse_raw(n, &mut dn_hat);
        Self {
            grid,
            up: up_hat,
            dn: dn_hat,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .up
            .iter()
            .chain(self.dn.iter())
            .map(|z| z.norm_sqr())
            .sum();
        (s * self.grid.weight()).sqrt()
    }

    /// Spectral H¹ norm with the Japanese bracket multiplier ⟨ξ⟩.
    pub fn h1_norm(&self) -> f64 {
        let n = self.grid.n;
        let mut up = self.up.clone();
        let mut dn = self.dn.clone();
        fft2_forward(n, &mut up);
        fft2_forward(n, &mut dn);
        let norm = 1.0 / (n * n) as f64;
        let mut acc = 0.0;
        for j2 in 0..n {
            let k2 = self.grid.k_phys(j2);
            for j1 in 0..n {
                let k1 = self.grid.k_phys(j1);
                let idx = j2 * n + j1;
                let bracket = 1.0 + k1 * k1 + k2 * k2;
                acc += bracket * (up[idx].norm_sqr() + dn[idx].norm_sqr()) * norm * norm;
            }
        }
        (acc * self.grid.l * self.grid.l).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            up: self
                .up
                .iter()
                .zip(other.up.iter())
                .map(|(a, b)| a - b)
                .collect(),
            dn: self
                .dn
                .iter()
                .zip(other.dn.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            up: self
                .up
                .iter()
                .zip(other.up.iter())
                .map(|(a, b)| a + c * b)
                .collect(),
            dn: self
                .dn
                .iter()
                .zip(other.dn.iter())
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self
            .up
            .iter()
            .zip(other.up.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            + self
                .dn
                .iter()
                .zip(other.dn.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>();
        s * self.grid.weight()
    }

    pub(crate) fn flatten(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(2 * self.up.len());
        v.extend_from_slice(&self.up);
        v.extend_from_slice(&self.dn);
        v
    }

    pub(crate) fn from_flat(grid: BoxGrid, flat: &[Complex64]) -> Self {
        let len = grid.n * grid.n;
        Self {
            grid,
            up: flat[..len].to_vec(),
            dn: flat[len..].to_vec(),
        }
    }
}

/// Operator metadata carried into reports.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorMeta {
    pub kind: String,
    pub epsilon: Option<f64>,
    pub m: f64,
    pub beta: f64,
    pub wall: bool,
}

/// Matrix-free H = D·σ + (m + βΔ)σ₃ + zeroth-order term on the periodic box.
pub struct DiscreteOperator2D {
    pub grid: BoxGrid,
    pub m: f64,
    pub beta: f64,
    /// Constant zeroth-order matrix (homogenized, ρ ≡ 1).
    uniform: Option<Mat2>,
    /// Pointwise zeroth-order matrix samples (oscillatory or wall-modulated).
    pointwise: Option<Vec<Mat2>>,
    pub meta: OperatorMeta,
}

impl DiscreteOperator2D {
    /// The unperturbed operator H^∞.
    pub fn unperturbed(grid: BoxGrid, m: f64, beta: f64) -> Self {
        Self {
            grid,
            m,
            beta,
            uniform: None,
            pointwise: None,
            meta: OperatorMeta {
                kind: "h_inf".into(),
                epsilon: None,
                m,
                beta,
                wall: false,
            },
        }
    }

    /// Homogenized operator with the βρ²(x₂)τ zeroth-order term. `wall: None`
    /// means ρ ≡ 1 (constant coefficients, exactly solvable).
    pub fn homogenized(
        grid: BoxGrid,
        tensor: &EffectiveTensor,
        wall: Option<&DomainWallProfile>,
        m: f64,
        beta: f64,
    ) -> Self {
        let tau = tensor.matrix();
        let (uniform, pointwise) = match wall {
            None => (Some(tau.scale(Complex64::new(beta, 0.0))), None),
            Some(w) => {
                let n = grid.n;
                let mut pts = Vec::with_capacity(n * n);
                for j2 in 0..n {
                    let (_, x2) = grid.node(0, j2);
                    let rho = w.rho_mirror_periodic(x2, grid.l);
                    let scale = Complex64::new(beta * rho * rho, 0.0);
                    for _ in 0..n {
                        pts.push(tau.scale(scale));
                    }
                }
                (None, Some(pts))
            }
        };
        Self {
            grid,
            m,
            beta,
            uniform,
            pointwise,
            meta: OperatorMeta {
                kind: "h0".into(),
                epsilon: None,
                m,
                beta,
                wall: wall.is_some(),
            },
        }
    }

    /// Oscillatory operator H^ε with the (1/ε)ρ(x)W(x/ε) potential.
    /// ε must equal L/k for integer k with N a multiple of 8k so the unit
    /// cell is resolved by at least 8 points and lands exactly on the grid.
    pub fn oscillatory(
        grid: BoxGrid,
        eps: f64,
        potentials: &PotentialSet,
        wall: Option<&DomainWallProfile>,
        m: f64,
        beta: f64,
    ) -> Result<Self, Oper2dError> {
        let k = grid.l / eps;
        let k_int = k.round();
        if k_int < 1.0 || (k - k_int).abs() > 1e-9 || grid.n % (8 * k_int as usize) != 0 {
            return Err(Oper2dError::IncommensurateEpsilon {
                eps,
                l: grid.l,
                n: grid.n,
            });
        }
        let k_int = k_int as usize;
        let cell_pts = grid.n / k_int;
        // W on the ε-cell sub-grid: x_j/ε mod 1 runs over the uniform
        // cell_pts grid, so a Fourier resample of each W entry is exact for
        // band-limited potentials.
        let w_fields = potentials.assemble_w();
        let mut w_resampled = Vec::with_capacity(4);
        for f in &w_fields {
            w_resampled.push(f.resample(cell_pts)?);
        }
        let n = grid.n;
        let mut pts = Vec::with_capacity(n * n);
        for j2 in 0..n {
            let (_, x2) = grid.node(0, j2);
            let rho = match wall {
                Some(w) => w.rho_mirror_periodic(x2, grid.l),
                None => 1.0,
            };
            let scale = Complex64::new(rho / eps, 0.0);
            let c2 = j2 % cell_pts;
            for j1 in 0..n {
                let c1 = j1 % cell_pts;
                let idx = c2 * cell_pts + c1;
                let w_mat = Mat2::new(
                    w_resampled[0].values()[idx],
                    w_resampled[1].values()[idx],
                    w_resampled[2].values()[idx],
                    w_resampled[3].values()[idx],
                );
                pts.push(w_mat.scale(scale));
            }
        }
        Ok(Self {
            grid,
            m,
            beta,
            uniform: None,
            pointwise: Some(pts),
            meta: OperatorMeta {
                kind: "h_eps".into(),
                epsilon: Some(eps),
                m,
                beta,
                wall: wall.is_some(),
            },
        })
    }

    /// Symbol of the constant-coefficient part at FFT bin (j1, j2), including
    /// the uniform zeroth-order term. The Nyquist derivative mode is zeroed
    /// (matching the torus convention); the Laplacian keeps all modes.
    fn symbol(&self, j1: usize, j2: usize) -> Mat2 {
        let n = self.grid.n;
        let nyq = n / 2;
        let k1 = if j1 == nyq { 0.0 } else { self.grid.k_phys(j1) };
        let k2 = if j2 == nyq { 0.0 } else { self.grid.k_phys(j2) };
        let k1_full = self.grid.k_phys(j1);
        let k2_full = self.grid.k_phys(j2);
        let mass = self.m - self.beta * (k1_full * k1_full + k2_full * k2_full);
        let mut s = Mat2::new(
            Complex64::new(mass, 0.0),
            Complex64::new(k1, -k2),
            Complex64::new(k1, k2),
            Complex64::new(-mass, 0.0),
        );
        if let Some(u) = &self.uniform {
            s = s.add(u);
        }
        s
    }

    /// y = H·x.
    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        let n = self.grid.n;
        let mut up = psi.up.clone();
        let mut dn = psi.dn.clone();
        fft2_forward(n, &mut up);
        fft2_forward(n, &mut dn);
        for j2 in 0..n {
            for j1 in 0..n {
                let idx = j2 * n + j1;
                let s = self.symbol(j1, j2);
                let v = s.apply([up[idx], dn[idx]]);
                up[idx] = v[0];
                dn[idx] = v[1];
            }
        }
        let norm = Complex64::new(1.0 / (n * n) as f64, 0.0);
        for v in up.iter_mut().chain(dn.iter_mut()) {
            *v *= norm;
        }
        fft2_inverse_raw(n, &mut up);
        fft2_inverse_raw(n, &mut dn);
        if let Some(pts) = &self.pointwise {
            for idx in 0..n * n {
                let v = pts[idx].apply([psi.up[idx], psi.dn[idx]]);
                up[idx] += v[0];
                dn[idx] += v[1];
            }
        }
        SpinorField {
            grid: self.grid,
            up,
            dn,
        }
    }

    /// Exact resolvent (H_const − z)⁻¹ f of the constant-coefficient part
    /// (symbol plus uniform term), used directly when the operator has no
    /// pointwise potential and as the Krylov preconditioner otherwise.
    pub fn constant_resolvent(&self, z: Complex64, f: &SpinorField) -> SpinorField {
        let n = self.grid.n;
        let mut up = f.up.clone();
        let mut dn = f.dn.clone();
        fft2_forward(n, &mut up);
        fft2_forward(n, &mut dn);
        for j2 in 0..n {
            for j1 in 0..n {
                let idx = j2 * n + j1;
                let s = self.symbol(j1, j2);
                // (S − z)⁻¹ via the 2×2 inverse.
                let a = s.a11 - z;
                let d = s.a22 - z;
                let det = a * d - s.a12 * s.a21;
                let (b1, b2) = (up[idx], dn[idx]);
                up[idx] = (d * b1 - s.a12 * b2) / det;
                dn[idx] = (-s.a21 * b1 + a * b2) / det;
            }
        }
        let norm = Complex64::new(1.0 / (n * n) as f64, 0.0);
        for v in up.iter_mut().chain(dn.iter_mut()) {
            *v *= norm;
        }
        fft2_inverse_raw(n, &mut up);
        fft2_inverse_raw(n, &mut dn);
        SpinorField {
            grid: self.grid,
            up,
            dn,
        }
    }

    pub fn has_pointwise(&self) -> bool {
        self.pointwise.is_some()
    }

    /// Max |⟨Hu, v⟩ − ⟨u, Hv⟩| / (‖u‖‖v‖) over seeded random probe pairs.
    pub fn hermiticity_defect(&self, probes: usize, seed: u64) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..probes {
            let u = SpinorField::random_band_limited(
                self.grid,
                (self.grid.n as i64) / 3,
                seed + 2 * p as u64,
            );
            let v = SpinorField::random_band_limited(
                self.grid,
                (self.grid.n as i64) / 3,
                seed + 2 * p as u64 + 1,
            );
            let hu = self.apply(&u);
            let hv = self.apply(&v);
            let lhs = hu.inner(&v);
            let rhs = u.inner(&hv);
            let denom = u.l2_norm() * v.l2_norm();
            worst = worst.max((lhs - rhs).norm() / denom);
        }
        worst
    }
}

/// Pointwise application of ρ(x)σ₃T(x/ε) to a spinor: the first-order
/// two-scale corrector ψ^f = ρσ₃T(x/ε)ψ^s.
pub fn corrector_field(
    psi_s: &SpinorField,
    t_fields: &[crate::torus::PeriodicField; 4],
    wall: Option<&DomainWallProfile>,
    eps: f64,
) -> Result<SpinorField, Oper2dError> {
    let grid = psi_s.grid;
    let k = grid.l / eps;
    let k_int = k.round();
    if k_int < 1.0 || (k - k_int).abs() > 1e-9 || grid.n % (k_int as usize) != 0 {
        return Err(Oper2dError::IncommensurateEpsilon {
            eps,
            l: grid.l,
            n: grid.n,
        });
    }
    let cell_pts = grid.n / k_int as usize;
    let cell_grid_target = if cell_pts >= 8 && cell_pts % 2 == 0 {
        cell_pts
    } else {
        return Err(Oper2dError::IncommensurateEpsilon {
            eps,
            l: grid.l,
            n: grid.n,
        });
    };
    let mut t_res = Vec::with_capacity(4);
    for f in t_fields {
        t_res.push(f.resample(cell_grid_target)?);
    }
    let n = grid.n;
    let mut out = SpinorField::zeros(grid);
    for j2 in 0..n {
        let (_, x2) = grid.node(0, j2);
        let rho = match wall {
            Some(w) => w.rho_mirror_periodic(x2, grid.l),
            None => 1.0,
        };
        let c2 = j2 % cell_pts;
        for j1 in 0..n {
            let c1 = j1 % cell_pts;
            let idx_cell = c2 * cell_pts + c1;
            let idx = j2 * n + j1;
            let t_mat = Mat2::new(
                t_res[0].values()[idx_cell],
                t_res[1].values()[idx_cell],
                t_res[2].values()[idx_cell],
                t_res[3].values()[idx_cell],
            );
            let s3t = SIGMA_3.mul(&t_mat).scale(Complex64::new(rho, 0.0));
            let v = s3t.apply([psi_s.up[idx], psi_s.dn[idx]]);
            out.up[idx] = v[0];
            out.dn[idx] = v[1];
        }
    }
    Ok(out)
}

/// Shorthand used by tests: sample the grid spacing needed so the ε cell is
/// resolved by at least 8 points.
pub fn commensurate(grid: BoxGrid, eps: f64) -> bool {
    let k = grid.l / eps;
    let k_int = k.round();
    k_int >= 1.0 && (k - k_int).abs() <= 1e-9 && grid.n % (8 * k_int as usize) == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::PotentialSet;
    use crate::torus::PeriodicGrid;

    fn grid() -> BoxGrid {
        BoxGrid::new(1.0, 64).unwrap()
    }

    #[test]
    fn plane_wave_matches_symbol() {
        let g = grid();
        let op = DiscreteOperator2D::unperturbed(g, 0.7, 1.3);
        // u = e^{2πi(3x1 + 1x2)/L} e1
        let kx = 2.0 * PI * 3.0 / g.l;
        let ky = 2.0 * PI / g.l;
        let u = SpinorField::sample(g, |x1, x2| {
            (
                Complex64::from_polar(1.0, kx * x1 + ky * x2),
                Complex64::new(0.0, 0.0),
            )
        });
        let hu = op.apply(&u);
        let mass = 0.7 - 1.3 * (kx * kx + ky * ky);
        // H e^{ikx}e1 = (mass·e1 + (k1+ik2)·e2)e^{ikx}
        for idx in 0..g.n * g.n {
            let phase = u.up[idx];
            assert!((hu.up[idx] - mass * phase).norm() < 1e-9);
            assert!(
                (hu.dn[idx] - Complex64::new(kx, ky) * phase).norm() < 1e-9,
                "dn mismatch"
            );
        }
    }

    #[test]
    fn zero_potential_oscillatory_equals_unperturbed() {
        let g = grid();
        let cell = PeriodicGrid::new(16).unwrap();
        let zero = crate::torus::PeriodicField::zeros(cell);
        let p = PotentialSet::new(zero.clone(), zero.clone(), zero.clone(), zero, "").unwrap();
        let h_eps = DiscreteOperator2D::oscillatory(g, 0.25, &p, None, -0.05, 1.0).unwrap();
        let h_inf = DiscreteOperator2D::unperturbed(g, -0.05, 1.0);
        let u = SpinorField::random_band_limited(g, 5, 33);
        let a = h_eps.apply(&u);
        let b = h_inf.apply(&u);
        assert!(a.sub(&b).l2_norm() < 1e-12 * b.l2_norm().max(1.0));
    }

    #[test]
    fn commensurability_is_enforced() {
        let g = grid();
        let p = PotentialSet::electric(PeriodicGrid::new(16).unwrap(), 1.0);
        // eps = 1/3: k = 3, 64 not a multiple of 24.
        assert!(matches!(
            DiscreteOperator2D::oscillatory(g, 1.0 / 3.0, &p, None, 1.0, 1.0),
            Err(Oper2dError::IncommensurateEpsilon { .. })
        ));
    }

    #[test]
    fn operators_are_hermitian_on_probes() {
        let g = grid();
        let p = PotentialSet::electric(PeriodicGrid::new(16).unwrap(), 4.0);
        let h = DiscreteOperator2D::oscillatory(g, 0.125, &p, None, -0.05, 1.0).unwrap();
        assert!(h.hermiticity_defect(3, 7) < 1e-10);
        let t = EffectiveTensor::zero(-0.05, 1.0);
        let wall =
            DomainWallProfile::new(-0.05, 0.05, crate::wall::WallShape::SmoothstepQuintic).unwrap();
        let h0 = DiscreteOperator2D::homogenized(g, &t, Some(&wall), -0.05, 1.0);
        assert!(h0.hermiticity_defect(3, 11) < 1e-10);
    }

    #[test]
    fn potential_expectation_is_real() {
        let g = grid();
        let p = PotentialSet::magnetic(PeriodicGrid::new(16).unwrap(), 2.0);
        let h_eps = DiscreteOperator2D::oscillatory(g, 0.25, &p, None, 1.0, 1.0).unwrap();
        let h_inf = DiscreteOperator2D::unperturbed(g, 1.0, 1.0);
        let u = SpinorField::random_band_limited(g, 4, 99);
        // ⟨u, (1/ε)ρWu⟩ = ⟨u, (H^ε − H^∞)u⟩ is real for Hermitian W.
        let diff = h_eps.apply(&u).sub(&h_inf.apply(&u));
        let e = u.inner(&diff);
        assert!(e.im.abs() < 1e-10 * e.re.abs().max(1.0));
    }

    #[test]
    fn exact_resolvent_solves_constant_operator() {
        let g = grid();
        let op = DiscreteOperator2D::unperturbed(g, -0.05, 1.0);
        let z = Complex64::new(0.0, 1.0);
        let f = SpinorField::random_band_limited(g, 6, 5);
        let psi = op.constant_resolvent(z, &f);
        let res = op.apply(&psi).add_scaled(-z, &psi).sub(&f);
        assert!(res.l2_norm() < 1e-10 * f.l2_norm());
        // Resolvent bound ‖ψ‖ ≤ ‖f‖/|Im z|.
        assert!(psi.l2_norm() <= f.l2_norm() / z.im.abs() * (1.0 + 1e-12));
    }

    #[test]
    fn corrector_structure_electric() {
        let g = grid();
        let cell = PeriodicGrid::new(32).unwrap();
        let p = PotentialSet::electric(cell, 1.0);
        let sol = crate::cell::solve_cells(&p, 1.0).unwrap();
        let psi = SpinorField::gaussian_bump(g, (0.5, 0.5), 0.12);
        let f = corrector_field(&psi, &sol.t, None, 0.25).unwrap();
        // Diagonal T with T11 = T22 ⇒ up = T11·psi_up, dn = −T22·psi_dn = 0.
        assert!(f.dn.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        let t11_interp = crate::torus::TrigInterp::new(&sol.t[0]);
        for &(a, b) in &[(5usize, 5usize), (17, 40), (63, 1)] {
            let idx = b * g.n + a;
            let (x1, x2) = g.node(a, b);
            let expect = t11_interp.eval(x1 / 0.25, x2 / 0.25) * psi.up[idx];
            assert!((f.up[idx] - expect).norm() < 1e-10);
        }
    }
}
