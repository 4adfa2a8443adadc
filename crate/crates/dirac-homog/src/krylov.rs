//! Right-preconditioned restarted GMRES over complex vectors. The resolvent
//! solves precondition with the exact Fourier inverse of the
//! constant-coefficient part, so iteration counts stay modest even for the
//! 1/ε-strong oscillatory potentials.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("GMRES did not reach relative residual {tol:.1e} in {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct GmresConfig {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            restart: 80,
            max_iter: 4000,
        }
    }
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * xi;
    }
}

/// Solve A·x = b with right preconditioning: A·M⁻¹·u = b, x = M⁻¹·u.
/// `apply_a` and `apply_m_inv` map a vector to a new vector.
pub fn gmres(
    apply_a: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    apply_m_inv: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    cfg: GmresConfig,
) -> Result<(Vec<Complex64>, usize), KrylovError> {
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((vec![Complex64::new(0.0, 0.0); n], 0));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut total_iters = 0usize;
    let m = cfg.restart;

    loop {
        // r = b − A x
        let ax = apply_a(&x);
        let mut r: Vec<Complex64> = b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect();
        let r_norm = norm(&r);
        if r_norm <= cfg.tol * b_norm {
            return Ok((x, total_iters));
        }
        if total_iters >= cfg.max_iter {
            return Err(KrylovError::NoConvergence {
                iterations: total_iters,
                residual: r_norm / b_norm,
                tol: cfg.tol,
            });
        }
        for ri in r.iter_mut() {
            *ri /= r_norm;
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r];
        // Hessenberg in column-major with Givens rotations applied on the fly.
        let mut h = vec![Complex64::new(0.0, 0.0); (m + 1) * m];
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(r_norm, 0.0);
        let mut k_used = 0usize;

        for k in 0..m {
            total_iters += 1;
            let zk = apply_m_inv(&basis[k]);
            let mut w = apply_a(&zk);
            // Modified Gram-Schmidt.
            for (i, vi) in basis.iter().enumerate() {
                let hik = dotc(vi, &w);
                h[i + k * (m + 1)] = hik;
                axpy(&mut w, -hik, vi);
            }
            let w_norm = norm(&w);
            h[(k + 1) + k * (m + 1)] = Complex64::new(w_norm, 0.0);
            // Apply the accumulated rotations to the new column.
            for i in 0..k {
                let hi = h[i + k * (m + 1)];
                let hj = h[(i + 1) + k * (m + 1)];
                h[i + k * (m + 1)] = cs[i].conj() * hi + sn[i].conj() * hj;
                h[(i + 1) + k * (m + 1)] = -sn[i] * hi + cs[i] * hj;
            }
            let hi = h[k + k * (m + 1)];
            let hj = h[(k + 1) + k * (m + 1)];
            let denom = (hi.norm_sqr() + hj.norm_sqr()).sqrt();
            if denom > 0.0 {
                cs[k] = hi / denom;
                sn[k] = hj / denom;
                h[k + k * (m + 1)] = Complex64::new(denom, 0.0);
                h[(k + 1) + k * (m + 1)] = Complex64::new(0.0, 0.0);
                let gk = g[k];
                g[k] = cs[k].conj() * gk;
                g[k + 1] = -sn[k] * gk;
            }
            k_used = k + 1;
            let rel = g[k + 1].norm() / b_norm;
            if rel <= cfg.tol || w_norm < 1e-14 || total_iters >= cfg.max_iter {
                break;
            }
            for wi in w.iter_mut() {
                *wi /= w_norm;
            }
            basis.push(w);
        }

        // Back substitution for the least-squares coefficients.
        let mut y = vec![Complex64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k_used {
                acc -= h[i + j * (m + 1)] * y[j];
            }
            y[i] = acc / h[i + i * (m + 1)];
        }
        // x += M⁻¹ (V y)
        let mut vy = vec![Complex64::new(0.0, 0.0); n];
        for (j, yj) in y.iter().enumerate() {
            axpy(&mut vy, *yj, &basis[j]);
        }
        let dx = apply_m_inv(&vy);
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_diagonal_system() {
        let n = 64;
        let diag: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + i as f64, 0.3))
            .collect();
        let b: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        let d = diag.clone();
        let apply = move |x: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(d.iter()).map(|(xi, di)| xi * di).collect()
        };
        let ident = |x: &[Complex64]| x.to_vec();
        let (x, iters) = gmres(&apply, &ident, &b, GmresConfig::default()).unwrap();
        assert!(iters <= 70);
        for i in 0..n {
            assert!((x[i] * diag[i] - b[i]).norm() < 1e-8);
        }
    }

    #[test]
    fn preconditioner_cuts_iterations() {
        let n = 128;
        let diag: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + (i as f64) * 10.0, 1.0))
            .collect();
        let b = vec![Complex64::new(1.0, 0.0); n];
        let d1 = diag.clone();
        let apply = move |x: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(d1.iter()).map(|(xi, di)| xi * di).collect()
        };
        let d2 = diag.clone();
        let minv = move |x: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(d2.iter()).map(|(xi, di)| xi / di).collect()
        };
        let (x, iters) = gmres(&apply, &minv, &b, GmresConfig::default()).unwrap();
        assert!(iters <= 3, "preconditioned solve took {iters} iterations");
        for i in 0..n {
            assert!((x[i] * diag[i] - b[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let b = vec![Complex64::new(0.0, 0.0); 16];
        let apply = |x: &[Complex64]| x.to_vec();
        let (x, iters) = gmres(&apply, &apply, &b, GmresConfig::default()).unwrap();
        assert_eq!(iters, 0);
        assert!(x.iter().all(|z| z.norm() == 0.0));
    }
}
