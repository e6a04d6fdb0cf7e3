//! Recover the coarse community structure from the coarse adjacency alone
//! and compare against the ground truth.
//!
//! Run with: cargo run --release --example community_recovery

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coarsectrl::coarsening::{self, OverlapParams, SyncMode};
use coarsectrl::{estimators, metrics, sbm};

fn main() {
    let n = 2000;
    let (m, r, k) = (100, 10, 4);
    let model = sbm::BlockModel::assortative(k, 0.5, 0.1, 0.1).unwrap();
    let assign = sbm::generate_membership(n, &[0.25; 4]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
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
    let phi = coarsening::coarse_membership(&map, &assign).unwrap();

    let est = estimators::mm_community_estimate(&gt, k, None).unwrap();
    println!("pure coarse nodes selected: {:?}", est.pure_indices);
    println!(
        "top-{k} eigenvalues by magnitude: {:?}",
        est.eigvals.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()
    );

    let learned = estimators::learned_theta(&est, 1.0, n).unwrap();
    let d = sbm::relative_size_matrix(&assign);
    let errs = metrics::thm2_diagnostics(
        &est.phi_hat,
        &est.p_hat,
        &learned.d_hat,
        &phi.phi,
        &model.p,
        &d,
    )
    .unwrap();
    println!("membership error   ||E_Phi||_1,1 / m = {:.4}", errs.e_phi_norm);
    println!("block matrix error ||E_P||_max       = {:.4}", errs.e_p_max);
    println!("size matrix error  ||E_D||_max       = {:.4}", errs.e_d_max);
}
