//! Full learning pipeline on one instance: estimate communities from the
//! coarse adjacency, derive the controllability estimate, and compare both
//! estimators against the exact group vector and a random baseline.
//!
//! Run with: cargo run --release --example learned_controllability

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coarsectrl::coarsening::{self, OverlapParams, SyncMode};
use coarsectrl::{controllability, estimators, metrics, sbm};

fn main() {
    let n = 2000;
    let (m, r, k) = (100, 10, 4);
    let model = sbm::BlockModel::assortative(k, 0.5, 0.1, 0.1).unwrap();
    let assign = sbm::generate_membership(n, &[0.25; 4]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = sbm::sample_fine_graph(&model, &assign, &mut rng).unwrap();
    let map = coarsening::sample_coarsening(
        &assign,
        m,
        r,
        SyncMode::Overlap(OverlapParams::new(0.05).unwrap()),
        &mut rng,
    )
    .unwrap();
    let gt = coarsening::coarse_adjacency(&map, &g).unwrap();

    // Ground truth from the fine system.
    let group = controllability::theta_group(&g, &map, 1.0).unwrap();

    // Estimator 1: treat the coarse graph as a reduced-order system.
    let coarse = estimators::prom_estimate(&gt, 1.0).unwrap();
    let delta_prom = metrics::delta_prom(&group, &coarse, r).unwrap();

    // Estimator 2: spectral community recovery, then the closed form.
    let est = estimators::mm_community_estimate(&gt, k, None).unwrap();
    let learned = estimators::learned_theta(&est, 1.0, n).unwrap();
    let delta_learned = metrics::delta_learned(&learned.theta_hat, &group, r).unwrap();

    // Reference: a vector with i.i.d. uniform [1, 2] entries.
    let mut base_rng = ChaCha8Rng::seed_from_u64(1009);
    let baseline = estimators::baseline_vector(m, &mut base_rng);
    let delta_base = metrics::delta_learned(&baseline, &group, r).unwrap();

    println!("kappa_hat = {:.4}", learned.kappa_hat);
    println!("reduced-order error  {delta_prom:.4}");
    println!("learning-based error {delta_learned:.4}");
    println!("random baseline      {delta_base:.4}");
}
