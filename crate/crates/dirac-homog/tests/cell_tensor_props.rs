//! Cell-problem and effective-tensor properties: linearity, scaling laws,
//! the scalar-corrector decomposition, and the two printed forms of τ on
//! seeded random band-limited potentials.

use dirac_homog::cell::{solve_cells, PotentialSet};
use dirac_homog::tensor::{tau_from_wt, tau_gradient_form, EffectiveTensor};
use dirac_homog::torus::{PeriodicField, PeriodicGrid};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn grid() -> PeriodicGrid {
    PeriodicGrid::new(64).unwrap()
}

/// Real zero-mean band-limited potential with modes |k|∞ ≤ 3, seeded.
fn random_potential(grid: PeriodicGrid, seed: u64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for k1 in -3i64..=3 {
        for k2 in -3i64..=3 {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let decay = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            modes.push((
                k1,
                k2,
                (rng.random::<f64>() - 0.5) * decay,
                (rng.random::<f64>() - 0.5) * decay,
            ));
        }
    }
    PeriodicField::sample(grid, move |y1, y2| {
        let mut acc = 0.0;
        for &(k1, k2, a, b) in &modes {
            let phase = 2.0 * PI * (k1 as f64 * y1 + k2 as f64 * y2);
            acc += a * phase.cos() + b * phase.sin();
        }
        Complex64::new(acc, 0.0)
    })
}

fn random_set(seed: u64) -> PotentialSet {
    let g = grid();
    PotentialSet::new(
        random_potential(g, seed),
        random_potential(g, seed + 1000),
        random_potential(g, seed + 2000),
        random_potential(g, seed + 3000),
        "seeded band-limited",
    )
    .unwrap()
}

#[test]
fn corrector_is_linear_in_the_potential() {
    let p = random_set(11);
    let scaled = p.scaled(2.5);
    let s1 = solve_cells(&p, 1.0).unwrap();
    let s2 = solve_cells(&scaled, 1.0).unwrap();
    for k in 0..4 {
        let expect = s1.t[k].scaled(Complex64::new(2.5, 0.0));
        let err = s2.t[k].sub(&expect).max_abs();
        assert!(
            err <= 1e-12 * expect.max_abs().max(1e-12),
            "entry {k}: {err}"
        );
    }
}

#[test]
fn beta_scaling_is_inverse() {
    let p = random_set(17);
    let s1 = solve_cells(&p, 0.7).unwrap();
    let s2 = solve_cells(&p, 1.4).unwrap();
    for k in 0..4 {
        let expect = s1.t[k].scaled(Complex64::new(0.5, 0.0));
        assert!(s2.t[k].sub(&expect).max_abs() <= 1e-12 * s1.t[k].max_abs().max(1e-12));
    }
}

#[test]
fn scalar_decomposition_on_random_magnetic_potentials() {
    for seed in [3u64, 5, 8, 13] {
        let g = grid();
        let zero = PeriodicField::zeros(g);
        let p = PotentialSet::new(
            zero.clone(),
            random_potential(g, seed),
            random_potential(g, seed + 500),
            zero,
            "",
        )
        .unwrap();
        let sol = solve_cells(&p, 1.0).unwrap();
        assert!(sol.verify_t_decomposition() <= 1e-10, "seed {seed}");
    }
}

#[test]
fn hermitian_rhs_gives_hermitian_corrector() {
    let sol = solve_cells(&random_set(23), 1.0).unwrap();
    assert!(sol.hermitian_symmetry_defect() <= 1e-10);
    assert!(sol.t[0].max_imag() <= 1e-12);
    assert!(sol.t[3].max_imag() <= 1e-12);
}

#[test]
fn dual_tau_forms_agree_on_twenty_seeds() {
    for seed in 0..20u64 {
        let sol = solve_cells(&random_set(seed), 1.0).unwrap();
        let a = tau_from_wt(&sol);
        let b = tau_gradient_form(&sol);
        let norm = a.norm();
        assert!(
            a.sub(&b).norm() <= 1e-9 * (1.0 + norm),
            "seed {seed}: {}",
            a.sub(&b).norm()
        );
        assert!(a.hermitian_defect() <= 1e-10 * (1.0 + norm), "seed {seed}");
    }
}

#[test]
fn tau_is_quadratic_in_amplitude() {
    let p = random_set(31);
    let s1 = solve_cells(&p, 1.0).unwrap();
    let s2 = solve_cells(&p.scaled(3.0), 1.0).unwrap();
    let t1 = tau_from_wt(&s1);
    let t2 = tau_from_wt(&s2);
    let expect = t1.scale(Complex64::new(9.0, 0.0));
    assert!(t2.sub(&expect).norm() <= 1e-12 * expect.norm().max(1e-12));
}

#[test]
fn tau_is_inverse_square_in_beta() {
    let p = random_set(37);
    let t1 = tau_from_wt(&solve_cells(&p, 1.0).unwrap());
    let t2 = tau_from_wt(&solve_cells(&p, 2.0).unwrap());
    let expect = t1.scale(Complex64::new(0.25, 0.0));
    assert!(t2.sub(&expect).norm() <= 1e-12 * t1.norm().max(1e-12));
}

#[test]
fn electric_only_is_positive_tau3_and_magnetic_only_negative() {
    let g = grid();
    for amp in [0.5, 1.0, 4.0] {
        let e = EffectiveTensor::from_cells(
            &solve_cells(&PotentialSet::electric(g, amp), 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(e.tau3 > 0.0);
        assert!(e.tau0.abs() <= 1e-12 && e.tau1.abs() <= 1e-12 && e.tau2.abs() <= 1e-12);
        let m = EffectiveTensor::from_cells(
            &solve_cells(&PotentialSet::magnetic(g, amp), 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(m.tau3 < 0.0);
        assert!(m.tau0.abs() <= 1e-12 && m.tau1.abs() <= 1e-12 && m.tau2.abs() <= 1e-12);
    }
    // General electric potential, not just a single mode.
    let v0 = random_potential(g, 77);
    let zero = PeriodicField::zeros(g);
    let p = PotentialSet::new(v0, zero.clone(), zero.clone(), zero, "").unwrap();
    let t = EffectiveTensor::from_cells(&solve_cells(&p, 1.0).unwrap(), 1.0).unwrap();
    assert!(t.tau3 > 0.0);
}
