//! Run a small seeded parameter sweep and write the CSV artifacts.
//!
//! Run with: cargo run --release --example sweep

use coarsectrl::experiment::{self, ExperimentConfig, SweepSpec, SweepVariable};

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.n = 800;
    cfg.m = 40;
    cfg.r = 10;
    cfg.k = 4;
    cfg.rho_n = 0.2;
    cfg.seed_count = Some(5);
    cfg.sweep = Some(SweepSpec {
        variable: SweepVariable::RhoN,
        values: vec![0.1, 0.2, 0.4],
    });

    experiment::init_thread_pool();
    let result = experiment::run_sweep(&cfg).unwrap();
    print!("{}", result.aggregate_csv());

    let out = std::env::temp_dir().join("coarsectrl_sweep");
    experiment::write_sweep_artifacts(&cfg, &result, &out).unwrap();
    println!("artifacts written to {}", out.display());
}
