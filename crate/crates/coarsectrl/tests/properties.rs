//! Property-based tests for the metric layer and the persistence formats.

use ndarray::Array1;
use proptest::prelude::*;

use coarsectrl::coarsening::CoarseningMap;
use coarsectrl::io;
use coarsectrl::metrics;
use coarsectrl::sbm::FineGraph;

fn shifted_vector(len: usize) -> impl Strategy<Value = Array1<f64>> {
    proptest::collection::vec(1.01f64..5.0, len..=len).prop_map(Array1::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn delta_is_scale_invariant(
        v in (2usize..12).prop_flat_map(shifted_vector),
        scale in 0.05f64..20.0,
    ) {
        let rescaled = v.mapv(|x| 1.0 + scale * (x - 1.0));
        let d = metrics::delta_generic(&v, &rescaled).unwrap();
        prop_assert!(d < 1e-11, "delta = {d}");
    }

    #[test]
    fn delta_within_range_and_bound(
        pair in (2usize..12).prop_flat_map(|len| (shifted_vector(len), shifted_vector(len))),
    ) {
        let (u, v) = pair;
        let d = metrics::delta_generic(&u, &v).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
        prop_assert!(d <= metrics::delta_upper_bound(&u, &v) + 1e-12);
        let sym = metrics::delta_generic(&v, &u).unwrap();
        prop_assert!((d - sym).abs() < 1e-12);
    }

    #[test]
    fn adjacency_encoding_round_trips(
        bits in proptest::collection::vec(proptest::bool::ANY, 1..=36),
    ) {
        // Interpret the bits as the upper triangle of a symmetric matrix.
        let n = (1..=8).find(|&n| n * (n + 1) / 2 >= bits.len()).unwrap();
        let mut a = ndarray::Array2::<f64>::zeros((n, n));
        let mut it = bits.iter();
        'outer: for i in 0..n {
            for j in i..n {
                match it.next() {
                    Some(&b) => {
                        a[[i, j]] = b as u8 as f64;
                        a[[j, i]] = a[[i, j]];
                    }
                    None => break 'outer,
                }
            }
        }
        let g = FineGraph { a };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        io::write_adjacency(&path, &g).unwrap();
        let back = io::read_adjacency(&path).unwrap();
        prop_assert_eq!(g.a, back.a);
    }

    #[test]
    fn coarsening_encoding_round_trips(
        seed in proptest::num::u64::ANY,
        m in 1usize..6,
        r in 1usize..5,
    ) {
        use rand::{Rng, SeedableRng};
        let n = m * r + 3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut nodes: Vec<usize> = (0..n).collect();
        // Fisher-Yates prefix to pick disjoint supports.
        for i in 0..(m * r) {
            let j = rng.gen_range(i..n);
            nodes.swap(i, j);
        }
        let supports: Vec<Vec<usize>> = (0..m)
            .map(|i| {
                let mut s = nodes[i * r..(i + 1) * r].to_vec();
                s.sort_unstable();
                s
            })
            .collect();
        let map = CoarseningMap::from_supports(n, r, supports).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        io::write_coarsening(&path, &map).unwrap();
        let back = io::read_coarsening(&path).unwrap();
        prop_assert_eq!(map.supports, back.supports);
        prop_assert_eq!((map.m, map.n, map.r), (back.m, back.n, back.r));
    }
}
