//! Edge spectrum of the domain-wall Hamiltonian for the electric transition
//! scenario (m = -0.05, β = 1, V₀ = 4cos(2πy₁) ⇒ m₋ ≈ +0.153) and its
//! m = +0.05 control: spectral flow and the quantized band integral.
//!
//! Run: cargo run --release -p dirac-homog --example edge_spectrum

use dirac_homog::edge::{edge_bands, EdgeScanConfig, SwitchFunction, SwitchShape};
use dirac_homog::strip::InterfaceModel;
use dirac_homog::wall::{DomainWallProfile, WallShape};
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    let tau3 = 2.0 / (PI * PI);
    let m0 = 0.05;
    let wall = DomainWallProfile::new(-1.0, 1.0, WallShape::SmoothstepQuintic).unwrap();
    for (label, m) in [("transition", -0.05f64), ("control", 0.05)] {
        let model = InterfaceModel::new(m, 1.0, [0.0, 0.0, 0.0, tau3]);
        let cfg = EdgeScanConfig::derive(30.0, 1024, &wall, m0, 3.0, 121);
        println!(
            "{label}: m+ = {:+.3}, m- = {:+.5}",
            model.m_plus(),
            model.m_minus()
        );
        let t = Instant::now();
        let bands = edge_bands(&model, &wall, &cfg).unwrap();
        println!(
            "  scan: {} xi points ({} bands) in {:.1?}",
            bands.xi.len(),
            bands.bands.len(),
            t.elapsed()
        );
        for b in bands.wall_bands() {
            let e_min = b
                .points
                .iter()
                .map(|p| p.energy)
                .fold(f64::INFINITY, f64::min);
            let e_max = b
                .points
                .iter()
                .map(|p| p.energy)
                .fold(f64::NEG_INFINITY, f64::max);
            if e_min < m0 && e_max > -m0 {
                println!(
                    "  wall band {}: {} points, localization {:.3}, E in [{:+.4}, {:+.4}]",
                    b.id,
                    b.points.len(),
                    b.mean_localization(),
                    e_min,
                    e_max
                );
            }
        }
        let flow = bands.spectral_flow(0.0, 2.0 * m0).unwrap();
        let phi = SwitchFunction::new(m0, SwitchShape::QuinticBump);
        let phi_alt = SwitchFunction::new(m0, SwitchShape::SepticBump);
        println!(
            "  spectral flow = {flow}, band integral = {:.5} (alt switch {:.5})",
            bands.conductivity_band_integral(&phi).unwrap(),
            bands.conductivity_band_integral(&phi_alt).unwrap()
        );
    }
}
