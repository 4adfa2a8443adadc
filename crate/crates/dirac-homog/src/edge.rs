//! Edge spectrum of the domain-wall Hamiltonian: ξ₁-parametrized band
//! structure with eigenvector-overlap continuation, adaptive refinement near
//! level crossings, signed spectral flow through the common gap, and the
//! quantized conductivity as a band integral of the switch density φ′.
//!
//! Dirichlet truncation produces spurious modes pinned to x₂ = ±L; they are
//! filtered by the localization score, not by the boundary condition, so the
//! wall physics stays untouched.

use crate::par;
use crate::strip::{InterfaceModel, StripError, StripOperator};
use crate::wall::DomainWallProfile;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EdgeError {
    #[error(transparent)]
    Strip(#[from] StripError),
    #[error("unresolved crossing of level {level} on band {band}: energy jump {jump:.3e} exceeds {allowed:.3e} between xi1 = {xi_lo} and {xi_hi}")]
    UnresolvedCrossing {
        band: usize,
        level: f64,
        jump: f64,
        allowed: f64,
        xi_lo: f64,
        xi_hi: f64,
    },
    #[error("band {band} terminates at xi1 = {xi} with phi'({energy:.4e}) = {weight:.3e} still active; the switch support is not exhausted")]
    IncompleteSupport {
        band: usize,
        xi: f64,
        energy: f64,
        weight: f64,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Switch functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchShape {
    /// φ′ ∝ (1 − u²)², the integral of a quintic smoothstep bump.
    QuinticBump,
    /// φ′ ∝ (1 − u²)³, a flatter error-function-like polynomial profile.
    SepticBump,
}

/// Non-decreasing φ with φ = 0 below −m₀, φ = 1 above m₀, and φ′ a density
/// of states supported in (−m₀, m₀) integrating to 1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SwitchFunction {
    pub m0: f64,
    pub shape: SwitchShape,
}

impl SwitchFunction {
    pub fn new(m0: f64, shape: SwitchShape) -> Self {
        assert!(m0 > 0.0, "switch half-width must be positive");
        Self { m0, shape }
    }

    pub fn phi(&self, h: f64) -> f64 {
        let u = h / self.m0;
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self.shape {
            SwitchShape::QuinticBump => {
                0.5 + (15.0 / 16.0) * (u - 2.0 * u.powi(3) / 3.0 + u.powi(5) / 5.0)
            }
            SwitchShape::SepticBump => {
                0.5 + (35.0 / 32.0) * (u - u.powi(3) + 0.6 * u.powi(5) - u.powi(7) / 7.0)
            }
        }
    }

    pub fn dphi(&self, h: f64) -> f64 {
        let u = h / self.m0;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        match self.shape {
            SwitchShape::QuinticBump => (15.0 / 16.0) * w * w / self.m0,
            SwitchShape::SepticBump => (35.0 / 32.0) * w * w * w / self.m0,
        }
    }

    /// Numerical ∫φ′ over the support (trapezoid, 20001 points).
    pub fn density_integral(&self) -> f64 {
        let n = 20000usize;
        let h = 2.0 * self.m0 / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = -self.m0 + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * self.dphi(x);
        }
        acc * h
    }
}

// ---------------------------------------------------------------------------
// Edge band scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct EdgeScanConfig {
    /// Strip half-width and interior point count.
    pub l: f64,
    pub n: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    pub steps: usize,
    /// Track states with |E| below this window.
    pub e_window: f64,
    /// Refine ξ₁ wherever a tracked segment intersects |E| ≤ refine_band…
    pub refine_band: f64,
    /// …until adjacent energies differ by at most this.
    pub refine_de: f64,
    pub max_refine_rounds: usize,
    /// Wall zone [a − w, b + w] in x₂; the localization score compares mass
    /// here against mass in the Dirichlet boundary zones of width
    /// `bdry_width`, so slowly decaying modes are classified by where they
    /// peak rather than by how far they reach.
    pub wall_lo: f64,
    pub wall_hi: f64,
    pub bdry_width: f64,
    pub loc_threshold: f64,
    /// States closer in energy than this are rotated to diagonalize the
    /// wall-zone mass operator, undoing the exponentially small
    /// wall/boundary hybridization at avoided crossings so bands keep their
    /// character.
    pub rotate_tol: f64,
}

impl EdgeScanConfig {
    /// Defaults derived from the strip geometry, the wall and the common-gap
    /// half-width m₀.
    pub fn derive(
        l: f64,
        n: usize,
        wall: &DomainWallProfile,
        m0: f64,
        xi_half_range: f64,
        steps: usize,
    ) -> Self {
        // Wall zone padded by 5 cell units, kept off the boundary zones.
        let pad = 5.0;
        let lo = (wall.a.min(-wall.b) - pad).max(-0.8 * l);
        let hi = (wall.b.max(-wall.a) + pad).min(0.8 * l);
        Self {
            l,
            n,
            xi_min: -xi_half_range,
            xi_max: xi_half_range,
            steps,
            e_window: 1.4 * m0,
            refine_band: 1.05 * m0,
            refine_de: m0 / 8.0,
            max_refine_rounds: 12,
            wall_lo: lo,
            wall_hi: hi,
            bdry_width: 5.0f64.min(0.15 * l),
            loc_threshold: 0.75,
            rotate_tol: m0 / 4.0,
        }
    }

    /// Wall-vs-boundary contrast of one eigenvector: mass in the wall zone
    /// divided by mass in the wall zone plus the two boundary zones.
    pub fn contrast_score(&self, op: &StripOperator, vec: &[Complex64]) -> f64 {
        let f_wall = op.localization_score(vec, self.wall_lo, self.wall_hi);
        let f_bdry = op.localization_score(vec, -self.l, -self.l + self.bdry_width)
            + op.localization_score(vec, self.l - self.bdry_width, self.l);
        if f_wall + f_bdry == 0.0 {
            0.0
        } else {
            f_wall / (f_wall + f_bdry)
        }
    }
}

/// One tracked state at one momentum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeState {
    pub energy: f64,
    pub localization: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandPoint {
    pub xi_index: usize,
    pub energy: f64,
    pub localization: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Band {
    pub id: usize,
    pub points: Vec<BandPoint>,
}

impl Band {
    pub fn mean_localization(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().map(|p| p.localization).sum::<f64>() / self.points.len() as f64
    }
}

/// The tracked edge spectrum over the ξ₁ sweep (refined grid included).
#[derive(Debug, Clone, Serialize)]
pub struct EdgeBands {
    pub xi: Vec<f64>,
    /// Per-ξ states sorted ascending in energy.
    pub states: Vec<Vec<EdgeState>>,
    pub bands: Vec<Band>,
    pub loc_threshold: f64,
    pub e_window: f64,
}

type SolvedColumn = Vec<(f64, f64, Vec<Complex64>)>;

fn solve_column(
    model: &InterfaceModel,
    wall: &DomainWallProfile,
    cfg: &EdgeScanConfig,
    xi: f64,
) -> Result<SolvedColumn, StripError> {
    let op = StripOperator::build(xi, model, Some(wall), 0.0, cfg.l, cfg.n)?;
    let (mut vals, mut vecs) = op.eigpairs_in(-cfg.e_window, cfg.e_window)?;
    disentangle_clusters(&op, cfg, &mut vals, &mut vecs);
    Ok(vals
        .into_iter()
        .zip(vecs)
        .map(|(e, v)| {
            let loc = cfg.contrast_score(&op, &v);
            (e, loc, v)
        })
        .collect())
}

/// Within clusters of nearly degenerate eigenvalues, rotate the eigenbasis to
/// diagonalize the localization-window mass operator. The finite strip turns
/// the crossing of a wall band with a Dirichlet boundary band into an
/// exponentially thin avoided crossing; the rotated (diabatic) states recover
/// the clean wall/boundary split that band continuation needs.
fn disentangle_clusters(
    op: &StripOperator,
    cfg: &EdgeScanConfig,
    vals: &mut [f64],
    vecs: &mut [Vec<Complex64>],
) {
    use crate::linalg::eigh_dense;
    let n = vals.len();
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] < cfg.rotate_tol {
            end += 1;
        }
        let k = end - start;
        if k >= 2 {
            // Wall-zone mass matrix M_ab = Σ_{x_j in zone} v_a(j)† v_b(j).
            let nodes = op.nodes();
            let mut mass = vec![Complex64::new(0.0, 0.0); k * k];
            for a in 0..k {
                for b in 0..k {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &x) in nodes.iter().enumerate() {
                        if x >= cfg.wall_lo && x <= cfg.wall_hi {
                            let va = &vecs[start + a];
                            let vb = &vecs[start + b];
                            acc +=
                                va[2 * j].conj() * vb[2 * j] + va[2 * j + 1].conj() * vb[2 * j + 1];
                        }
                    }
                    mass[a + b * k] = acc;
                }
            }
            if let Ok((_, z)) = eigh_dense(&mut mass, k) {
                let dim = vecs[start].len();
                let mut new_vecs: Vec<Vec<Complex64>> = Vec::with_capacity(k);
                let mut new_vals = Vec::with_capacity(k);
                for col in 0..k {
                    let mut v = vec![Complex64::new(0.0, 0.0); dim];
                    let mut e = 0.0;
                    for a in 0..k {
                        let c = z[a + col * k];
                        e += c.norm_sqr() * vals[start + a];
                        for (vi, wi) in v.iter_mut().zip(vecs[start + a].iter()) {
                            *vi += c * wi;
                        }
                    }
                    new_vals.push(e);
                    new_vecs.push(v);
                }
                // Keep ascending energy order inside the cluster.
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&a, &b| new_vals[a].partial_cmp(&new_vals[b]).unwrap());
                for (slot, &src) in order.iter().enumerate() {
                    vals[start + slot] = new_vals[src];
                    vecs[start + slot] = new_vecs[src].clone();
                }
            }
        }
        start = end;
    }
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

/// Greedy maximum-overlap assignment between two eigenvector sets; ties are
/// broken by energy proximity. Returns `match_of_cur[j] = Some(i_prev)`.
fn match_columns(prev: &SolvedColumn, cur: &SolvedColumn, min_overlap: f64) -> Vec<Option<usize>> {
    let mut cands: Vec<(f64, f64, usize, usize)> = Vec::with_capacity(prev.len() * cur.len());
    for (i, (ep, _, vp)) in prev.iter().enumerate() {
        for (j, (ec, _, vc)) in cur.iter().enumerate() {
            let o = overlap(vp, vc);
            if o >= min_overlap {
                cands.push((o, (ep - ec).abs(), i, j));
            }
        }
    }
    cands.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut used_prev = vec![false; prev.len()];
    let mut match_of_cur = vec![None; cur.len()];
    for (_, _, i, j) in cands {
        if !used_prev[i] && match_of_cur[j].is_none() {
            used_prev[i] = true;
            match_of_cur[j] = Some(i);
        }
    }
    match_of_cur
}

/// Run the sweep: initial uniform grid, then adaptive bisection wherever a
/// tracked band straddles the refinement window with too coarse a step.
pub fn edge_bands(
    model: &InterfaceModel,
    wall: &DomainWallProfile,
    cfg: &EdgeScanConfig,
) -> Result<EdgeBands, EdgeError> {
    assert!(cfg.steps >= 2);
    let mut xi: Vec<f64> = (0..cfg.steps)
        .map(|i| cfg.xi_min + (cfg.xi_max - cfg.xi_min) * i as f64 / (cfg.steps - 1) as f64)
        .collect();
    let mut columns: Vec<SolvedColumn> = {
        let res = par::par_map_indexed(xi.len(), |i| solve_column(model, wall, cfg, xi[i]));
        res.into_iter().collect::<Result<_, _>>()?
    };

    for _round in 0..cfg.max_refine_rounds {
        let bands = continue_bands(&columns, 0.4);
        let mut new_xi: Vec<f64> = Vec::new();
        for band in &bands {
            for pair in band.points.windows(2) {
                let (i0, i1) = (pair[0].xi_index, pair[1].xi_index);
                let (e0, e1) = (pair[0].energy, pair[1].energy);
                let straddles = e0.min(e1) <= cfg.refine_band && e0.max(e1) >= -cfg.refine_band;
                if straddles && (e1 - e0).abs() > cfg.refine_de && (xi[i1] - xi[i0]).abs() > 1e-9 {
                    new_xi.push(0.5 * (xi[i0] + xi[i1]));
                }
            }
        }
        new_xi.sort_by(|a, b| a.partial_cmp(b).unwrap());
        new_xi.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        if new_xi.is_empty() {
            break;
        }
        let solved: Vec<SolvedColumn> = {
            let res =
                par::par_map_indexed(new_xi.len(), |i| solve_column(model, wall, cfg, new_xi[i]));
            res.into_iter().collect::<Result<_, _>>()?
        };
        for (x, col) in new_xi.into_iter().zip(solved) {
            let pos = xi.partition_point(|&v| v < x);
            xi.insert(pos, x);
            columns.insert(pos, col);
        }
    }

    let bands = continue_bands(&columns, 0.4);
    let states = columns
        .iter()
        .map(|col| {
            col.iter()
                .map(|(e, loc, _)| EdgeState {
                    energy: *e,
                    localization: *loc,
                })
                .collect()
        })
        .collect();
    Ok(EdgeBands {
        xi,
        states,
        bands,
        loc_threshold: cfg.loc_threshold,
        e_window: cfg.e_window,
    })
}

fn continue_bands(columns: &[SolvedColumn], min_overlap: f64) -> Vec<Band> {
    let mut bands: Vec<Band> = Vec::new();
    // band id of each state in the previous column
    let mut prev_ids: Vec<usize> = Vec::new();
    for (ci, col) in columns.iter().enumerate() {
        let mut ids = vec![usize::MAX; col.len()];
        if ci == 0 {
            for (j, (e, loc, _)) in col.iter().enumerate() {
                ids[j] = bands.len();
                bands.push(Band {
                    id: bands.len(),
                    points: vec![BandPoint {
                        xi_index: 0,
                        energy: *e,
                        localization: *loc,
                    }],
                });
            }
        } else {
            let matches = match_columns(&columns[ci - 1], col, min_overlap);
            for (j, (e, loc, _)) in col.iter().enumerate() {
                let point = BandPoint {
                    xi_index: ci,
                    energy: *e,
                    localization: *loc,
                };
                match matches[j] {
                    Some(ip) => {
                        let b = prev_ids[ip];
                        ids[j] = b;
                        bands[b].points.push(point);
                    }
                    None => {
                        ids[j] = bands.len();
                        bands.push(Band {
                            id: bands.len(),
                            points: vec![point],
                        });
                    }
                }
            }
        }
        prev_ids = ids;
    }
    bands
}

impl EdgeBands {
    /// Bands whose states live at the wall rather than the strip boundary.
    pub fn wall_bands(&self) -> impl Iterator<Item = &Band> {
        self.bands
            .iter()
            .filter(move |b| b.mean_localization() >= self.loc_threshold)
    }

    /// Signed count of wall-band crossings of `level`; the sign is the sign
    /// of dE/dξ₁ at the crossing. `gap_width` sets the resolution guard
    /// (adjacent-step jumps at a crossing must stay below gap_width/10).
    pub fn spectral_flow(&self, level: f64, gap_width: f64) -> Result<i64, EdgeError> {
        let allowed = gap_width / 10.0;
        let mut flow = 0i64;
        for band in self.wall_bands() {
            // Walk sign changes of E − level; points exactly on the level
            // are bridged by the surrounding nonzero signs.
            let mut last_sign = 0i64;
            let mut last_idx = 0usize;
            for (k, p) in band.points.iter().enumerate() {
                let d = p.energy - level;
                let s = if d > 0.0 {
                    1
                } else if d < 0.0 {
                    -1
                } else {
                    0
                };
                if s == 0 {
                    continue;
                }
                if last_sign != 0 && s != last_sign {
                    let jump = (p.energy - band.points[last_idx].energy).abs();
                    if jump > allowed {
                        return Err(EdgeError::UnresolvedCrossing {
                            band: band.id,
                            level,
                            jump,
                            allowed,
                            xi_lo: self.xi[band.points[last_idx].xi_index],
                            xi_hi: self.xi[p.xi_index],
                        });
                    }
                    flow += s;
                }
                last_sign = s;
                last_idx = k;
            }
        }
        Ok(flow)
    }

    /// Trapezoid quadrature of Σ_n ∫ φ′(E_n) dE_n over the wall bands.
    /// Errors when a wall band stops while φ′ is still active there.
    pub fn conductivity_band_integral(&self, phi: &SwitchFunction) -> Result<f64, EdgeError> {
        let peak = phi.dphi(0.0);
        let mut sigma = 0.0;
        for band in self.wall_bands() {
            if band.points.len() < 2 {
                continue;
            }
            for endpoint in [band.points.first().unwrap(), band.points.last().unwrap()] {
                let at_sweep_edge =
                    endpoint.xi_index == 0 || endpoint.xi_index == self.xi.len() - 1;
                let weight = phi.dphi(endpoint.energy);
                if weight > 1e-6 * peak && !at_sweep_edge {
                    return Err(EdgeError::IncompleteSupport {
                        band: band.id,
                        xi: self.xi[endpoint.xi_index],
                        energy: endpoint.energy,
                        weight,
                    });
                }
                if weight > 1e-3 * peak && at_sweep_edge {
                    return Err(EdgeError::IncompleteSupport {
                        band: band.id,
                        xi: self.xi[endpoint.xi_index],
                        energy: endpoint.energy,
                        weight,
                    });
                }
            }
            for pair in band.points.windows(2) {
                let (e0, e1) = (pair[0].energy, pair[1].energy);
                sigma += 0.5 * (phi.dphi(e0) + phi.dphi(e1)) * (e1 - e0);
            }
        }
        Ok(sigma)
    }

    /// Edge-band CSV: (xi1, band_id, energy, localization).
    pub fn dump_csv(&self, path: &Path) -> Result<(), EdgeError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "xi1,band_id,energy,localization")?;
        for band in &self.bands {
            for p in &band.points {
                writeln!(
                    file,
                    "{},{},{},{}",
                    self.xi[p.xi_index], band.id, p.energy, p.localization
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switch_functions_normalize() {
        for shape in [SwitchShape::QuinticBump, SwitchShape::SepticBump] {
            let phi = SwitchFunction::new(0.37, shape);
            assert!((phi.density_integral() - 1.0).abs() < 1e-10);
            assert_eq!(phi.phi(-0.37), 0.0);
            assert_eq!(phi.phi(0.37), 1.0);
            assert_eq!(phi.phi(-1.0), 0.0);
            assert_eq!(phi.phi(2.0), 1.0);
            assert!((phi.phi(0.0) - 0.5).abs() < 1e-14);
            assert!(phi.dphi(0.0) > 0.0);
            // Non-decreasing.
            let mut prev = -1.0;
            for i in 0..=200 {
                let h = -0.5 + i as f64 / 200.0;
                let v = phi.phi(h);
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn switch_matches_derivative_numerically() {
        let phi = SwitchFunction::new(0.2, SwitchShape::QuinticBump);
        for i in 0..40 {
            let h = -0.19 + 0.38 * i as f64 / 39.0;
            let eps = 1e-6;
            let fd = (phi.phi(h + eps) - phi.phi(h - eps)) / (2.0 * eps);
            assert!((fd - phi.dphi(h)).abs() < 1e-7);
        }
    }

    #[test]
    fn empty_bands_have_zero_flow_and_sigma() {
        let bands = EdgeBands {
            xi: vec![-1.0, 0.0, 1.0],
            states: vec![vec![], vec![], vec![]],
            bands: vec![],
            loc_threshold: 0.5,
            e_window: 1.0,
        };
        assert_eq!(bands.spectral_flow(0.0, 1.0).unwrap(), 0);
        let phi = SwitchFunction::new(0.3, SwitchShape::QuinticBump);
        assert_eq!(bands.conductivity_band_integral(&phi).unwrap(), 0.0);
    }

    #[test]
    fn synthetic_chiral_band_counts_once() {
        // A single synthetic band E = xi crossing upward through 0.
        let xi: Vec<f64> = (0..101).map(|i| -1.0 + i as f64 * 0.02).collect();
        let points: Vec<BandPoint> = xi
            .iter()
            .enumerate()
            .map(|(i, &x)| BandPoint {
                xi_index: i,
                energy: x,
                localization: 0.95,
            })
            .collect();
        let bands = EdgeBands {
            xi: xi.clone(),
            states: vec![],
            bands: vec![Band { id: 0, points }],
            loc_threshold: 0.5,
            e_window: 1.0,
        };
        assert_eq!(bands.spectral_flow(0.0, 0.5).unwrap(), 1);
        let phi = SwitchFunction::new(0.3, SwitchShape::QuinticBump);
        let sigma = bands.conductivity_band_integral(&phi).unwrap();
        assert!((sigma - 1.0).abs() < 1e-3, "sigma = {sigma}");
    }

    #[test]
    fn coarse_crossing_is_flagged() {
        let xi = vec![-1.0, 0.0, 1.0];
        let points = vec![
            BandPoint {
                xi_index: 0,
                energy: -0.4,
                localization: 0.9,
            },
            BandPoint {
                xi_index: 1,
                energy: 0.4,
                localization: 0.9,
            },
        ];
        let bands = EdgeBands {
            xi,
            states: vec![],
            bands: vec![Band { id: 0, points }],
            loc_threshold: 0.5,
            e_window: 1.0,
        };
        assert!(matches!(
            bands.spectral_flow(0.0, 0.5),
            Err(EdgeError::UnresolvedCrossing { .. })
        ));
    }
}
