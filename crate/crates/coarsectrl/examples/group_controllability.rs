//! Compute exact fine, group, and coarse controllability vectors on one
//! instance and measure the reduced-order approximation error.
//!
//! Run with: cargo run --release --example group_controllability

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coarsectrl::coarsening::{self, OverlapParams, SyncMode};
use coarsectrl::{controllability, estimators, metrics, sbm};

fn main() {
    let n = 1000;
    let (m, r) = (50, 10);
    let model = sbm::BlockModel::assortative(4, 0.5, 0.1, 0.2).unwrap();
    let assign = sbm::generate_membership(n, &[0.25; 4]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = sbm::sample_fine_graph(&model, &assign, &mut rng).unwrap();
    let map = coarsening::sample_coarsening(
        &assign,
        m,
        r,
        SyncMode::Overlap(OverlapParams::new(0.05).unwrap()),
        &mut rng,
    )
    .unwrap();

    // One eigendecomposition of the fine system yields everything exact.
    let dyn_fine = controllability::normalize(&g.a, 1.0).unwrap();
    let fine = controllability::theta_fine(&dyn_fine).unwrap();
    let group = controllability::theta_group_from_fine(&fine, &map).unwrap();

    // The reduced-order estimate sees only the coarse adjacency.
    let gt = coarsening::coarse_adjacency(&map, &g).unwrap();
    let coarse = estimators::prom_estimate(&gt, 1.0).unwrap();

    println!(
        "fine theta:   min {:.4}, max {:.4}",
        fine.theta.iter().cloned().fold(f64::INFINITY, f64::min),
        fine.theta.iter().cloned().fold(0.0f64, f64::max)
    );
    println!(
        "group theta:  first five entries {:?}",
        group.theta.iter().take(5).map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    println!(
        "coarse theta: first five entries {:?}",
        coarse.theta.iter().take(5).map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    );

    let err = metrics::delta_prom(&group, &coarse, r).unwrap();
    println!("reduced-order error delta = {err:.4} (range [0, 2])");

    // The closed form for the expected dynamics, for comparison.
    let expected = controllability::theta_group_expected(&model, &assign, &map, 1.0).unwrap();
    println!(
        "expected-dynamics group theta (closed form): first entry {:.6}, sampled counterpart {:.6}",
        expected.theta[0], group.theta[0]
    );
}
