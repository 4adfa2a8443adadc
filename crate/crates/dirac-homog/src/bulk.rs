//! Constant-coefficient bulk analysis of the 2×2 symbols: band surfaces,
//! spectral gaps, the common gap m₀, Berry-curvature Chern numbers computed
//! by disk quadrature plus an analytic tail, and the sign-formula indices.
//!
//! The traceless part of every symbol here is
//! h(ξ) = (ξ₁ + βτ₁, ξ₂ + βτ₂, m_eff − β|ξ|²) with an overall β·τ₀ shift, so
//! bands are E±(ξ) = β·τ₀ ± |h(ξ)| and everything reduces to the scalar
//! landscape |h|².

use crate::par;
use crate::tensor::EffectiveTensor;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BulkError {
    #[error("bulk model requires m ≠ 0 and β ≠ 0 (got m = {m}, beta = {beta})")]
    InvalidModel { m: f64, beta: f64 },
    #[error("no spectral gap: inf E₊ = {upper:.6e} ≤ sup E₋ = {lower:.6e} + tol")]
    NoGap { lower: f64, upper: f64 },
    #[error("no common spectral gap containing 0: intersection [{lo:.6e}, {hi:.6e}]")]
    NoCommonGap { lo: f64, hi: f64 },
    #[error(
        "Chern quadrature not quantized: raw value {raw:.6e} is {defect:.3e} away from an integer"
    )]
    NotQuantized { raw: f64, defect: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BulkLabel {
    Unperturbed,
    HomogenizedBulk,
}

/// Parameter set (m, β, τ) of a constant-coefficient 2×2 symbol.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BulkModel {
    pub label: BulkLabel,
    pub m: f64,
    pub beta: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

impl BulkModel {
    /// The unperturbed operator: τ ≡ 0.
    pub fn unperturbed(m: f64, beta: f64) -> Result<Self, BulkError> {
        if m == 0.0 || beta == 0.0 {
            return Err(BulkError::InvalidModel { m, beta });
        }
        Ok(Self {
            label: BulkLabel::Unperturbed,
            m,
            beta,
            tau0: 0.0,
            tau1: 0.0,
            tau2: 0.0,
            tau3: 0.0,
        })
    }

    /// The homogenized bulk on the perturbed side of the wall.
    pub fn homogenized(tensor: &EffectiveTensor) -> Result<Self, BulkError> {
        if tensor.m == 0.0 || tensor.beta == 0.0 {
            return Err(BulkError::InvalidModel {
                m: tensor.m,
                beta: tensor.beta,
            });
        }
        Ok(Self {
            label: BulkLabel::HomogenizedBulk,
            m: tensor.m,
            beta: tensor.beta,
            tau0: tensor.tau0,
            tau1: tensor.tau1,
            tau2: tensor.tau2,
            tau3: tensor.tau3,
        })
    }

    /// σ₃ coefficient at ξ = 0: m for the unperturbed model, m₋ = m + β·τ₃
    /// for the homogenized bulk.
    pub fn m_eff(&self) -> f64 {
        self.m + self.beta * self.tau3
    }

    /// In-plane shift of the symbol: h₁,₂ = ξ₁,₂ + β·τ₁,₂.
    fn shift(&self) -> (f64, f64) {
        (self.beta * self.tau1, self.beta * self.tau2)
    }

    /// |h(ξ)|² of the traceless part.
    fn h_sq(&self, xi1: f64, xi2: f64) -> f64 {
        let (s1, s2) = self.shift();
        let g = self.m_eff() - self.beta * (xi1 * xi1 + xi2 * xi2);
        (xi1 + s1).powi(2) + (xi2 + s2).powi(2) + g * g
    }

    /// Band energies (E₋, E₊) of the symbol at ξ.
    pub fn symbol_eigenvalues(&self, xi1: f64, xi2: f64) -> (f64, f64) {
        let r = self.h_sq(xi1, xi2).sqrt();
        let shift = self.beta * self.tau0;
        (shift - r, shift + r)
    }

    /// Residual of the characteristic polynomial at energy `s` for momentum ξ.
    pub fn char_poly_residual(&self, xi1: f64, xi2: f64, s: f64) -> f64 {
        let xi_sq = xi1 * xi1 + xi2 * xi2;
        let g = self.m - self.beta * xi_sq;
        match self.label {
            BulkLabel::Unperturbed => (s * s - g * g - xi_sq).abs(),
            BulkLabel::HomogenizedBulk => {
                let t11 = self.tau0 + self.tau3;
                let t22 = self.tau0 - self.tau3;
                // |ξ + βτ₁₂|² with the off-diagonal entry τ₁₂ = τ₁ − iτ₂
                // paired against ξ₁ − iξ₂.
                let off_re = xi1 + self.beta * self.tau1;
                let off_im = -xi2 - self.beta * self.tau2;
                let off_sq = off_re * off_re + off_im * off_im;
                (s * s + self.beta * (t11 + t22) * s
                    - (g * g + self.beta * g * (t11 - t22) - self.beta.powi(2) * t11 * t22)
                    - off_sq)
                    .abs()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Gap finding
// ---------------------------------------------------------------------------

const GAP_TOL: f64 = 1e-8;

/// Minimize |h|² exactly: by rotational symmetry the minimizer lies either on
/// the line through the in-plane shift (1D scan + golden-section refinement)
/// or on the closed-form critical circle 2β(m_eff − β|ξ|²) = 1.
fn min_h_sq(model: &BulkModel) -> f64 {
    let (s1, s2) = model.shift();
    let t = (s1 * s1 + s2 * s2).sqrt();
    let m_eff = model.m_eff();
    let beta = model.beta;
    // Case A: on the line; rotate the shift onto the axis, so
    // g_a(u) = (m_eff − βu²)² + (u + t)².
    let g_a = |u: f64| (m_eff - beta * u * u).powi(2) + (u + t).powi(2);
    let r_max = 2.0 + 2.0 * (m_eff / beta).abs().max(1.0).sqrt() + t;
    let coarse = 1601usize;
    let mut best_u = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..coarse {
        let u = -r_max + 2.0 * r_max * (i as f64) / (coarse - 1) as f64;
        let v = g_a(u);
        if v < best {
            best = v;
            best_u = u;
        }
    }
    let h = 2.0 * r_max / (coarse - 1) as f64;
    let refined = golden_section(g_a, best_u - h, best_u + h);
    let mut min = refined;
    // Case B: critical circle |ξ|² = m_eff/β − 1/(2β²), if it exists.
    let s_star = m_eff / beta - 1.0 / (2.0 * beta * beta);
    if s_star >= 0.0 {
        let r_star = s_star.sqrt();
        let g_b = 1.0 / (4.0 * beta * beta) + (r_star - t).powi(2);
        min = min.min(g_b);
    }
    min
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// Per-model gap interval (sup E₋, inf E₊) around the symmetry point.
pub fn find_gap(model: &BulkModel) -> Result<(f64, f64), BulkError> {
    let f_min = min_h_sq(model).max(0.0).sqrt();
    let shift = model.beta * model.tau0;
    let (lower, upper) = (shift - f_min, shift + f_min);
    if upper <= lower + GAP_TOL {
        return Err(BulkError::NoGap { lower, upper });
    }
    Ok((lower, upper))
}

/// Intersection of two model gaps, symmetrized about 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapReport {
    pub gap_lower: f64,
    pub gap_upper: f64,
    pub m0: f64,
    pub gap_a: (f64, f64),
    pub gap_b: (f64, f64),
}

pub fn common_gap(a: &BulkModel, b: &BulkModel) -> Result<GapReport, BulkError> {
    let ga = find_gap(a)?;
    let gb = find_gap(b)?;
    let lo = ga.0.max(gb.0);
    let hi = ga.1.min(gb.1);
    if !(lo < 0.0 && 0.0 < hi) {
        return Err(BulkError::NoCommonGap { lo, hi });
    }
    Ok(GapReport {
        gap_lower: lo,
        gap_upper: hi,
        m0: (-lo).min(hi),
        gap_a: ga,
        gap_b: gb,
    })
}

// ---------------------------------------------------------------------------
// Chern numbers
// ---------------------------------------------------------------------------

/// Quadrature resolution for the Berry-curvature integral.
#[derive(Debug, Clone, Copy)]
pub struct ChernResolution {
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for ChernResolution {
    fn default() -> Self {
        Self {
            n_radial: 2000,
            n_angular: 256,
        }
    }
}

/// Raw Berry-curvature integral c = (1/4π)∫ ĥ·(∂₁ĥ×∂₂ĥ) d²ξ.
///
/// The disk |ξ − ξ*| ≤ R centered on the in-plane zero ξ* = −β(τ₁,τ₂) is
/// integrated by a polar midpoint rule (the in-plane part of h is exactly
/// radial there), and the exterior contributes the closed-form solid angle
/// (1/4π)∮ (sign β + cos α(θ)) dθ of the boundary image on the sphere.
pub fn chern_raw(model: &BulkModel, res: ChernResolution) -> f64 {
    chern_raw_impl(model, res, true)
}

/// Sequential twin of [`chern_raw`]: same kernel through the sequential map,
/// bit-identical thanks to the tree reduction. Kept public for the
/// parallel-vs-sequential benches.
pub fn chern_raw_seq(model: &BulkModel, res: ChernResolution) -> f64 {
    chern_raw_impl(model, res, false)
}

fn chern_raw_impl(model: &BulkModel, res: ChernResolution, parallel: bool) -> f64 {
    let beta = model.beta;
    let m_eff = model.m_eff();
    let (s1, s2) = model.shift();
    let t_sq = s1 * s1 + s2 * s2;
    // σ₃ coefficient at the in-plane zero.
    let m_center = m_eff - beta * t_sq;
    let radius = {
        let r_gap = ((11.0 * m_eff.abs()) / beta.abs()).sqrt();
        (r_gap + t_sq.sqrt() + 2.0).max(4.0)
    };
    let n_r = res.n_radial;
    let n_th = res.n_angular;
    let dr = radius / n_r as f64;
    let dth = 2.0 * PI / n_th as f64;
    // Midpoint rings over r with a deterministic tree reduction.
    let ring = |i: usize| -> f64 {
        let r = (i as f64 + 0.5) * dr;
        let mut acc = 0.0;
        for j in 0..n_th {
            let th = (j as f64 + 0.5) * dth;
            // g = m_eff − β|ξ* + r ω|² = m_center − βr² − 2βr ω·ξ*.
            let omega_dot = -(th.cos() * s1 + th.sin() * s2);
            let g = m_center - beta * r * r - 2.0 * beta * r * omega_dot;
            let numer = m_center + beta * r * r;
            let denom = (r * r + g * g).powf(1.5);
            acc += numer / denom;
        }
        acc * r * dr * dth
    };
    let rings = if parallel {
        par::par_map_indexed(n_r, ring)
    } else {
        par::seq_map_indexed(n_r, ring)
    };
    let disk = par::tree_sum(&rings) / (4.0 * PI);
    // Analytic tail: solid angle swept by the boundary circle image.
    let sign_beta = beta.signum();
    let mut tail = 0.0;
    for j in 0..n_th {
        let th = (j as f64 + 0.5) * dth;
        let omega_dot = -(th.cos() * s1 + th.sin() * s2);
        let g = m_center - beta * radius * radius - 2.0 * beta * radius * omega_dot;
        let cos_alpha = g / (radius * radius + g * g).sqrt();
        tail += sign_beta + cos_alpha;
    }
    tail *= dth / (4.0 * PI);
    disk + tail
}

/// Chern number with quantization check: nearest integer of the raw integral,
/// erroring when the raw value sits more than 1e−3 from an integer.
pub fn chern_number(model: &BulkModel, res: ChernResolution) -> Result<(i64, f64), BulkError> {
    find_gap(model)?;
    let raw = chern_raw(model, res);
    let rounded = raw.round();
    let defect = (raw - rounded).abs();
    if defect > 1e-3 {
        return Err(BulkError::NotQuantized { raw, defect });
    }
    Ok((rounded as i64, raw))
}

/// ½(sign m_eff + sign β).
pub fn sign_formula_index(m_eff: f64, beta: f64) -> i64 {
    ((m_eff.signum() + beta.signum()) / 2.0).round() as i64
}

/// Bulk indices of the unperturbed/homogenized pair, each cross-checked
/// against the Chern quadrature.
#[derive(Debug, Clone, Serialize)]
pub struct BulkIndexPair {
    pub index_unperturbed: i64,
    pub index_homogenized: i64,
    pub chern_unperturbed_raw: f64,
    pub chern_homogenized_raw: f64,
    pub agree_unperturbed: bool,
    pub agree_homogenized: bool,
    pub differ: bool,
}

pub fn bulk_index_pair(
    unperturbed: &BulkModel,
    homogenized: &BulkModel,
    res: ChernResolution,
) -> Result<BulkIndexPair, BulkError> {
    let (c_inf, raw_inf) = chern_number(unperturbed, res)?;
    let (c_hom, raw_hom) = chern_number(homogenized, res)?;
    let sign_inf = sign_formula_index(unperturbed.m_eff(), unperturbed.beta);
    let sign_hom = sign_formula_index(homogenized.m_eff(), homogenized.beta);
    Ok(BulkIndexPair {
        index_unperturbed: sign_inf,
        index_homogenized: sign_hom,
        chern_unperturbed_raw: raw_inf,
        chern_homogenized_raw: raw_hom,
        agree_unperturbed: c_inf == sign_inf,
        agree_homogenized: c_hom == sign_hom,
        differ: sign_inf != sign_hom,
    })
}

/// Band-surface CSV (xi1, xi2, E_minus, E_plus) on a uniform grid for plotting.
pub fn dump_band_surface(
    model: &BulkModel,
    radius: f64,
    samples: usize,
    path: &Path,
) -> Result<(), BulkError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "xi1,xi2,E_minus,E_plus")?;
    for i in 0..samples {
        let xi1 = -radius + 2.0 * radius * i as f64 / (samples - 1) as f64;
        for j in 0..samples {
            let xi2 = -radius + 2.0 * radius * j as f64 / (samples - 1) as f64;
            let (lo, hi) = model.symbol_eigenvalues(xi1, xi2);
            writeln!(file, "{xi1},{xi2},{lo},{hi}")?;
        }
    }
    Ok(())
}
