//! Coarsen a sampled graph: draw the measurement matrix, form the coarse
//! adjacency, and report synchronization statistics.
//!
//! Run with: cargo run --example coarse_summary

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coarsectrl::coarsening::{self, OverlapParams, SyncMode};
use coarsectrl::sbm;

fn main() {
    let n = 900;
    let model = sbm::BlockModel::assortative(3, 0.5, 0.1, 0.4).unwrap();
    let assign = sbm::generate_membership(n, &[1.0 / 3.0; 3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = sbm::sample_fine_graph(&model, &assign, &mut rng).unwrap();

    let map = coarsening::sample_coarsening(
        &assign,
        30,
        10,
        SyncMode::Overlap(OverlapParams::new(0.05).unwrap()),
        &mut rng,
    )
    .unwrap();
    let gt = coarsening::coarse_adjacency(&map, &g).unwrap();
    let phi = coarsening::coarse_membership(&map, &assign).unwrap();
    let d = sbm::relative_size_matrix(&assign);
    let stats = coarsening::sync_stats(&phi, &d);

    println!("coarse nodes: {}, coverage per node: {}", map.m, map.r);
    println!("coarse adjacency entries lie in [0, 1]: max = {:.4}", gt
        .a_tilde
        .iter()
        .cloned()
        .fold(0.0f64, f64::max));
    println!("row support sizes (communities touched): {:?}", stats.support_sizes);
    println!("perfectly synchronized: {}", stats.perfect_sync);
    println!("balancedness gap ||D - Phi'Phi/m||_max = {:.4}", stats.balancedness_gap);

    // The same run with perfect synchronization for contrast.
    let mut rng2 = ChaCha8Rng::seed_from_u64(7);
    let sync_map =
        coarsening::sample_coarsening(&assign, 30, 10, SyncMode::PerfectSync, &mut rng2).unwrap();
    let sync_phi = coarsening::coarse_membership(&sync_map, &assign).unwrap();
    let sync_stats = coarsening::sync_stats(&sync_phi, &d);
    println!(
        "perfect-sync mode: all rows pure = {}, gap = {:.4}",
        sync_stats.perfect_sync, sync_stats.balancedness_gap
    );
}
