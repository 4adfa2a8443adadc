//! Resolvent convergence of the oscillatory operator to its homogenized
//! limit: per-ε errors and fitted log–log slopes for the electric transition
//! scenario, at a configurable box resolution.
//!
//! Run: cargo run --release -p dirac-homog --example convergence_rates [n_box] [full]

use dirac_homog::cell::{solve_cells, PotentialSet};
use dirac_homog::homog::{convergence_study, StudyConfig};
use dirac_homog::tensor::EffectiveTensor;
use dirac_homog::torus::PeriodicGrid;
use std::time::Instant;

fn main() {
    let cell = PeriodicGrid::new(64).unwrap();
    let p = PotentialSet::electric(cell, 4.0);
    let sol = solve_cells(&p, 1.0).unwrap();
    let tensor = EffectiveTensor::from_cells(&sol, -0.05).unwrap();

    let args: Vec<String> = std::env::args().collect();
    let n_box: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(128);
    let full: bool = args.get(2).map(|s| s == "full").unwrap_or(false);

    let mut cfg = StudyConfig::new(-0.05, 1.0);
    cfg.box_n = n_box;
    cfg.epsilons = if full {
        vec![0.25, 0.125, 0.0625, 0.03125]
    } else {
        vec![0.25, 0.125, 0.0625]
    };
    cfg.n_random_sources = if full { 16 } else { 2 };
    cfg.n_structured_sources = if full { 8 } else { 1 };
    let t = Instant::now();
    let study = convergence_study(&p, &sol, &tensor, &cfg).unwrap();
    println!("study at n_box = {n_box} in {:.1?}", t.elapsed());
    println!("eps        err_L2        err_H1corr    err_H1plain   opnorm      iters");
    for r in &study.rows {
        println!(
            "{:<9.5} {:<13.5e} {:<13.5e} {:<13.5e} {:<11.4e} {}",
            r.epsilon, r.err_l2, r.err_h1_corrected, r.err_h1_plain, r.op_norm_estimate, r.iters
        );
    }
    println!(
        "slopes: L2 = {:.4}, H1corr = {:.4}, H1plain = {:.4}, opnorm = {:.4}",
        study.slope_l2, study.slope_h1_corrected, study.slope_h1_plain, study.slope_op_norm
    );
}
