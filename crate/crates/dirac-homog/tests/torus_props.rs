//! Property tests for the spectral torus calculus.

use dirac_homog::torus::{PeriodicField, PeriodicGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn band_limited_field(grid: PeriodicGrid, modes: &[(i64, i64, f64, f64)]) -> PeriodicField {
    PeriodicField::sample(grid, |y1, y2| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(k1, k2, a, b) in modes {
            let phase = 2.0 * PI * (k1 as f64 * y1 + k2 as f64 * y2);
            acc += Complex64::new(a * phase.cos(), 0.0) + Complex64::new(b * phase.sin(), 0.0);
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_holds(seed_modes in proptest::collection::vec(
        (-5i64..=5, -5i64..=5, -1.0f64..1.0, -1.0f64..1.0), 1..6))
    {
        let grid = PeriodicGrid::new(32).unwrap();
        let f = band_limited_field(grid, &seed_modes);
        let coeffs = f.fourier_coefficients();
        let sum_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let norm_sq = f.l2_norm().powi(2);
        prop_assert!((sum_sq - norm_sq).abs() <= 1e-12 * norm_sq.max(1e-30));
    }

    #[test]
    fn laplacian_roundtrip_recovers_mean_free_part(seed_modes in proptest::collection::vec(
        (-5i64..=5, -5i64..=5, -1.0f64..1.0, -1.0f64..1.0), 1..6))
    {
        let grid = PeriodicGrid::new(32).unwrap();
        // Drop any k = 0 content so the rhs is solvable.
        let modes: Vec<_> = seed_modes
            .into_iter()
            .filter(|&(k1, k2, _, _)| (k1, k2) != (0, 0))
            .collect();
        prop_assume!(!modes.is_empty());
        let rhs = band_limited_field(grid, &modes);
        prop_assume!(rhs.max_abs() > 1e-12);
        let u = rhs.invert_laplacian().unwrap();
        prop_assert!(u.mean().norm() <= 1e-14);
        let back = u.spectral_laplacian();
        prop_assert!(back.sub(&rhs).l2_norm() <= 1e-10 * rhs.l2_norm());
    }

    #[test]
    fn gradient_matches_analytic_per_mode(k1 in -7i64..=7, k2 in -7i64..=7,
                                          a in 0.1f64..2.0)
    {
        prop_assume!((k1, k2) != (0, 0));
        let grid = PeriodicGrid::new(32).unwrap();
        let f = PeriodicField::sample(grid, |y1, y2| {
            let phase = 2.0 * PI * (k1 as f64 * y1 + k2 as f64 * y2);
            Complex64::new(a * phase.cos(), 0.0)
        });
        let (d1, d2) = f.spectral_gradient();
        let exact1 = PeriodicField::sample(grid, |y1, y2| {
            let phase = 2.0 * PI * (k1 as f64 * y1 + k2 as f64 * y2);
            Complex64::new(-a * 2.0 * PI * k1 as f64 * phase.sin(), 0.0)
        });
        let exact2 = PeriodicField::sample(grid, |y1, y2| {
            let phase = 2.0 * PI * (k1 as f64 * y1 + k2 as f64 * y2);
            Complex64::new(-a * 2.0 * PI * k2 as f64 * phase.sin(), 0.0)
        });
        let scale = a * 2.0 * PI * ((k1 * k1 + k2 * k2) as f64).sqrt();
        prop_assert!(d1.sub(&exact1).l2_norm() <= 1e-10 * scale);
        prop_assert!(d2.sub(&exact2).l2_norm() <= 1e-10 * scale);
    }
}

#[test]
fn field_dump_round_trips_through_csv() {
    let grid = PeriodicGrid::new(16).unwrap();
    let f = PeriodicField::sample(grid, |y1, y2| {
        Complex64::new((2.0 * PI * y1).cos(), (2.0 * PI * y2).sin())
    });
    let dir = std::env::temp_dir().join("dirac_homog_torus_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("field.csv");
    f.dump_csv(&path, "test field").unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "y1,y2,re,im");
    assert_eq!(text.lines().count(), 1 + 16 * 16);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["n"], 16);
}
