//! Small dense/banded Hermitian linear algebra on top of LAPACK.
//!
//! The strip and box Hamiltonians produced by finite-difference stencils are
//! narrow-banded, so eigenvalues come from `zhbevx` (banded reduction,
//! O(kd·n²)) and the few eigenvectors we need come from inverse iteration
//! with a banded LU (`zgbtrf`/`zgbtrs`), never from an O(n³) dense solve.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("inverse iteration did not converge for eigenvalue {value}: residual {residual:.3e}")]
    InverseIteration { value: f64, residual: f64 },
}

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

// ---------------------------------------------------------------------------
// 2x2 complex matrices (Pauli algebra lives here)
// ---------------------------------------------------------------------------

/// Dense complex 2×2 matrix, row-major entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl Mat2 {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn zero() -> Self {
        Self::new(C_ZERO, C_ZERO, C_ZERO, C_ZERO)
    }

    /// σ₀·c₀ + σ₁·c₁ + σ₂·c₂ + σ₃·c₃ from real Pauli coefficients.
    pub fn from_pauli(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Self::new(
            Complex64::new(c0 + c3, 0.0),
            Complex64::new(c1, -c2),
            Complex64::new(c1, c2),
            Complex64::new(c0 - c3, 0.0),
        )
    }

    /// Pauli coefficients (τ₀, τ₁, τ₂, τ₃) of a (near-)Hermitian matrix;
    /// complex in general, real up to rounding when the matrix is Hermitian.
    pub fn pauli_components(&self) -> [Complex64; 4] {
        let half = Complex64::new(0.5, 0.0);
        let ihalf = Complex64::new(0.0, 0.5);
        [
            half * (self.a11 + self.a22),
            half * (self.a12 + self.a21),
            ihalf * (self.a12 - self.a21),
            half * (self.a11 - self.a22),
        ]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(c * self.a11, c * self.a12, c * self.a21, c * self.a22)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.a11 + other.a11,
            self.a12 + other.a12,
            self.a21 + other.a21,
            self.a22 + other.a22,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.a11.conj(),
            self.a21.conj(),
            self.a12.conj(),
            self.a22.conj(),
        )
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr())
            .sqrt()
    }

    /// ‖A − A*‖_F, the Hermiticity defect.
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).norm()
    }

    /// Eigenvalues of a Hermitian 2×2 matrix, ascending.
    pub fn eigvals_hermitian(&self) -> (f64, f64) {
        let t = 0.5 * (self.a11.re + self.a22.re);
        let d = 0.5 * (self.a11.re - self.a22.re);
        let r = (d * d + self.a12.norm_sqr()).sqrt();
        (t - r, t + r)
    }
}

pub const SIGMA_1: Mat2 = Mat2::new(
    C_ZERO,
    Complex64::new(1.0, 0.0),
    Complex64::new(1.0, 0.0),
    C_ZERO,
);
pub const SIGMA_2: Mat2 = Mat2::new(
    C_ZERO,
    Complex64::new(0.0, -1.0),
    Complex64::new(0.0, 1.0),
    C_ZERO,
);
pub const SIGMA_3: Mat2 = Mat2::new(
    Complex64::new(1.0, 0.0),
    C_ZERO,
    C_ZERO,
    Complex64::new(-1.0, 0.0),
);

// ---------------------------------------------------------------------------
// Banded Hermitian matrices
// ---------------------------------------------------------------------------

/// Hermitian matrix with `kd` super-diagonals in LAPACK upper-band storage:
/// entry (i, j) with j−kd ≤ i ≤ j sits at `ab[(kd + i − j) + j·(kd+1)]`.
#[derive(Debug, Clone)]
pub struct HermitianBand {
    n: usize,
    kd: usize,
    ab: Vec<Complex64>,
}

impl HermitianBand {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self {
            n,
            kd,
            ab: vec![C_ZERO; (kd + 1) * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kd(&self) -> usize {
        self.kd
    }

    /// Add `v` to entry (i, j) of the upper triangle (i ≤ j). The mirrored
    /// (j, i) entry is implicit. Panics if the entry is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i <= j, "upper-band storage expects i <= j");
        assert!(
            j - i <= self.kd,
            "entry ({i},{j}) outside band kd={}",
            self.kd
        );
        let ldab = self.kd + 1;
        self.ab[(self.kd + i - j) + j * ldab] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if hi - lo > self.kd {
            return C_ZERO;
        }
        let ldab = self.kd + 1;
        let v = self.ab[(self.kd + lo - hi) + hi * ldab];
        if i <= j {
            v
        } else {
            v.conj()
        }
    }

    /// y = A·x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let ldab = self.kd + 1;
        y.fill(C_ZERO);
        for j in 0..self.n {
            let imin = j.saturating_sub(self.kd);
            for i in imin..=j {
                let a = self.ab[(self.kd + i - j) + j * ldab];
                y[i] += a * x[j];
                if i != j {
                    y[j] += a.conj() * x[i];
                }
            }
        }
    }

    /// 1-norm of the matrix, used as the scale for convergence thresholds.
    pub fn norm1(&self) -> f64 {
        let ldab = self.kd + 1;
        let mut col = vec![0.0f64; self.n];
        for j in 0..self.n {
            let imin = j.saturating_sub(self.kd);
            for i in imin..=j {
                let a = self.ab[(self.kd + i - j) + j * ldab].norm();
                col[j] += a;
                if i != j {
                    col[i] += a;
                }
            }
        }
        col.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest Hermiticity defect that dense reconstruction would see. The
    /// storage is Hermitian by construction, so this checks for NaN poisoning
    /// and misuse rather than floating-point drift.
    pub fn hermiticity_defect(&self) -> f64 {
        if self
            .ab
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            f64::INFINITY
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut m = vec![C_ZERO; n * n];
        for j in 0..n {
            for i in j.saturating_sub(self.kd)..=j {
                let v = self.get(i, j);
                m[i + j * n] = v;
                m[j + i * n] = v.conj();
            }
        }
        m
    }

    /// All eigenvalues in (vl, vu], ascending (no eigenvectors).
    pub fn eigvals_in(&self, vl: f64, vu: f64) -> Result<Vec<f64>, LinalgError> {
        let (w, _) = self.zhbevx(vl, vu)?;
        Ok(w)
    }

    /// Eigenpairs with eigenvalue in (vl, vu]: values ascending plus the
    /// matching eigenvectors (each of length n), obtained by banded inverse
    /// iteration with cluster re-orthogonalization.
    pub fn eigpairs_in(
        &self,
        vl: f64,
        vu: f64,
    ) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), LinalgError> {
        let w = self.eigvals_in(vl, vu)?;
        let vecs = self.inverse_iteration(&w)?;
        Ok((w, vecs))
    }

    fn zhbevx(&self, vl: f64, vu: f64) -> Result<(Vec<f64>, i32), LinalgError> {
        let n = self.n as i32;
        let kd = self.kd as i32;
        let ldab = kd + 1;
        let mut ab = self.ab.clone(); // zhbevx destroys AB
        let jobz = b'N' as i8;
        let range = b'V' as i8;
        let uplo = b'U' as i8;
        let abstol = 2.0 * f64::MIN_POSITIVE;
        let mut m = 0i32;
        let mut w = vec![0.0f64; self.n];
        let mut z = [C_ZERO; 1];
        let mut q = [C_ZERO; 1];
        let mut work = vec![C_ZERO; self.n];
        let mut rwork = vec![0.0f64; 7 * self.n];
        let mut iwork = vec![0i32; 5 * self.n];
        let mut ifail = vec![0i32; self.n];
        let mut info = 0i32;
        unsafe {
            lapack_sys::zhbevx_(
                &jobz,
                &range,
                &uplo,
                &n,
                &kd,
                ab.as_mut_ptr() as *mut _,
                &ldab,
                q.as_mut_ptr() as *mut _,
                &1,
                &vl,
                &vu,
                &0,
                &0,
                &abstol,
                &mut m,
                w.as_mut_ptr(),
                z.as_mut_ptr() as *mut _,
                &1,
                work.as_mut_ptr() as *mut _,
                rwork.as_mut_ptr(),
                iwork.as_mut_ptr(),
                ifail.as_mut_ptr(),
                &mut info,
            );
        }
        if info != 0 {
            return Err(LinalgError::Lapack {
                routine: "zhbevx",
                info,
            });
        }
        w.truncate(m as usize);
        Ok((w, m))
    }

    fn inverse_iteration(&self, values: &[f64]) -> Result<Vec<Vec<Complex64>>, LinalgError> {
        let scale = self.norm1().max(1.0);
        let cluster_tol = 1e-6 * scale;
        let mut vecs: Vec<Vec<Complex64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0usize;
        for (idx, &lambda) in values.iter().enumerate() {
            if idx > 0 && lambda - values[idx - 1] > cluster_tol {
                cluster_start = idx;
            }
            // Deterministic pseudo-random start vector.
            let mut x: Vec<Complex64> = (0..self.n)
                .map(|i| {
                    let s = (i as f64 + 1.0) * (idx as f64 + 1.7);
                    Complex64::new((s * 12.9898).sin(), (s * 78.233).cos())
                })
                .collect();
            normalize(&mut x);
            // Small shift separates members of a numerically degenerate cluster.
            let shift = lambda + (idx - cluster_start) as f64 * 1e-10 * scale;
            let lu = BandLu::factor(self, shift)?;
            let mut residual = f64::INFINITY;
            for _ in 0..8 {
                lu.solve(&mut x);
                for prev in &vecs[cluster_start..idx] {
                    let p = dotc(prev, &x);
                    for (xi, pi) in x.iter_mut().zip(prev.iter()) {
                        *xi -= p * pi;
                    }
                }
                normalize(&mut x);
                residual = self.eig_residual(&x, lambda);
                if residual <= 1e-10 * scale {
                    break;
                }
            }
            if residual > 1e-7 * scale {
                return Err(LinalgError::InverseIteration {
                    value: lambda,
                    residual,
                });
            }
            vecs.push(x);
        }
        Ok(vecs)
    }

    fn eig_residual(&self, v: &[Complex64], lambda: f64) -> f64 {
        let mut av = vec![C_ZERO; self.n];
        self.apply(v, &mut av);
        av.iter()
            .zip(v.iter())
            .map(|(a, x)| (a - lambda * x).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn normalize(x: &mut [Complex64]) {
    let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in x.iter_mut() {
            *z /= n;
        }
    }
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// LU factorization of (A − shift·I) for a [`HermitianBand`], in LAPACK
/// general-band storage with pivoting room.
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<i32>,
}

impl BandLu {
    fn factor(a: &HermitianBand, shift: f64) -> Result<Self, LinalgError> {
        let n = a.n();
        let kd = a.kd();
        let (kl, ku) = (kd, kd);
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![C_ZERO; ldab * n];
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                let mut v = a.get(i, j);
                if i == j {
                    v -= Complex64::new(shift, 0.0);
                }
                ab[(kl + ku + i - j) + j * ldab] = v;
            }
        }
        let mut ipiv = vec![0i32; n];
        let mut info = 0i32;
        unsafe {
            lapack_sys::zgbtrf_(
                &(n as i32),
                &(n as i32),
                &(kl as i32),
                &(ku as i32),
                ab.as_mut_ptr() as *mut _,
                &(ldab as i32),
                ipiv.as_mut_ptr(),
                &mut info,
            );
        }
        // info > 0 (exact singularity) is acceptable for inverse iteration:
        // the tiny pivot is exactly what steers the solve onto the eigenvector.
        if info < 0 {
            return Err(LinalgError::Lapack {
                routine: "zgbtrf",
                info,
            });
        }
        if info > 0 {
            // Replace the zero pivot with a tiny value to keep zgbtrs finite.
            let ldab = 2 * kl + ku + 1;
            for j in 0..n {
                let d = &mut ab[(kl + ku) + j * ldab];
                if d.norm() == 0.0 {
                    *d = Complex64::new(1e-300, 0.0);
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            ab,
            ipiv,
        })
    }

    fn solve(&self, x: &mut [Complex64]) {
        let trans = b'N' as i8;
        let ldab = (2 * self.kl + self.ku + 1) as i32;
        let mut info = 0i32;
        unsafe {
            lapack_sys::zgbtrs_(
                &trans,
                &(self.n as i32),
                &(self.kl as i32),
                &(self.ku as i32),
                &1,
                self.ab.as_ptr() as *const _,
                &ldab,
                self.ipiv.as_ptr(),
                x.as_mut_ptr() as *mut _,
                &(self.n as i32),
                &mut info,
            );
        }
        debug_assert_eq!(info, 0);
        // Guard against overflow out of a near-singular solve.
        let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !m.is_finite() {
            for z in x.iter_mut() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    *z = C_ZERO;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dense Hermitian eigendecomposition (small matrices, cross-checks)
// ---------------------------------------------------------------------------

/// Full eigendecomposition of a dense Hermitian matrix given in column-major
/// order. Returns ascending eigenvalues and the column-major eigenvector
/// matrix. Destroys `a`.
pub fn eigh_dense(
    a: &mut [Complex64],
    n: usize,
) -> Result<(Vec<f64>, Vec<Complex64>), LinalgError> {
    assert_eq!(a.len(), n * n);
    let jobz = b'V' as i8;
    let uplo = b'U' as i8;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    // Workspace query.
    let mut work_q = [C_ZERO; 1];
    let mut rwork_q = [0.0f64; 1];
    let mut iwork_q = [0i32; 1];
    let neg1 = -1i32;
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &(n as i32),
            a.as_mut_ptr() as *mut _,
            &(n as i32),
            w.as_mut_ptr(),
            work_q.as_mut_ptr() as *mut _,
            &neg1,
            rwork_q.as_mut_ptr(),
            &neg1,
            iwork_q.as_mut_ptr(),
            &neg1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack {
            routine: "zheevd(query)",
            info,
        });
    }
    let lwork = work_q[0].re as usize;
    let lrwork = rwork_q[0] as usize;
    let liwork = iwork_q[0] as usize;
    let mut work = vec![C_ZERO; lwork.max(1)];
    let mut rwork = vec![0.0f64; lrwork.max(1)];
    let mut iwork = vec![0i32; liwork.max(1)];
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &(n as i32),
            a.as_mut_ptr() as *mut _,
            &(n as i32),
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &(lwork as i32),
            rwork.as_mut_ptr(),
            &(lrwork as i32),
            iwork.as_mut_ptr(),
            &(liwork as i32),
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack {
            routine: "zheevd",
            info,
        });
    }
    Ok((w, a.to_vec()))
}
