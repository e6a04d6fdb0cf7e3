//! Sample a block-structured random graph and inspect its edge densities.
//!
//! Run with: cargo run --example generate_graph

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coarsectrl::sbm;

fn main() {
    let n = 600;
    let model = sbm::BlockModel::assortative(3, 0.5, 0.1, 0.5).unwrap();
    let assign = sbm::generate_membership(n, &[0.4, 0.35, 0.25]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = sbm::sample_fine_graph(&model, &assign, &mut rng).unwrap();

    println!("n = {n}, community sizes = {:?}", assign.community_sizes);
    println!("density warning (sparse regime): {}", model.density_warning(n));

    // Empirical block densities against the block probabilities.
    let ranges = assign.ranges();
    for (k1, r1) in ranges.iter().enumerate() {
        for (k2, r2) in ranges.iter().enumerate().skip(k1) {
            let mut edges = 0.0;
            let mut cells = 0.0;
            for u in r1.clone() {
                for v in r2.clone() {
                    edges += g.a[[u, v]];
                    cells += 1.0;
                }
            }
            println!(
                "block ({k1},{k2}): empirical density {:.4}, expected {:.4}",
                edges / cells,
                model.p[[k1, k2]]
            );
        }
    }

    let path = std::env::temp_dir().join("fine_graph.txt");
    coarsectrl::io::write_adjacency(&path, &g).unwrap();
    println!("adjacency written to {}", path.display());
}
