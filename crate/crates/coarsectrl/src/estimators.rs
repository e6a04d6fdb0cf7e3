//! The three estimators compared in the experiments: the reduced-order model,
//! the spectral mixed-membership pipeline, and the random baseline.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::coarsening::CoarseGraph;
use crate::controllability::{self, ControllabilityVector};
use crate::error::{Error, Result};
use crate::linalg::{self, SymEigen};

/// Condition-number cutoff above which the pure-row matrix counts as singular.
pub const PURE_ROW_COND_LIMIT: f64 = 1e12;

/// Entry threshold `e^-12` applied to the unnormalized membership estimate.
pub const MEMBERSHIP_FLOOR: f64 = 6.144212353328210e-6; // exp(-12)

/// Output of the spectral mixed-membership estimation.
#[derive(Debug, Clone)]
pub struct MMEstimate {
    pub phi_hat: Array2<f64>,
    pub p_hat: Array2<f64>,
    pub pure_indices: Vec<usize>,
    pub pruned_indices: Vec<usize>,
    pub eigvals: Array1<f64>,
}

/// Community-level quantities inferred from an `MMEstimate` and the resulting
/// controllability estimate.
#[derive(Debug, Clone)]
pub struct LearnedEstimate {
    pub d_hat: Array2<f64>,
    pub kappa_hat: f64,
    pub upsilon_hat: Array2<f64>,
    pub theta_hat: Array1<f64>,
}

/// Estimate the coarse membership and block probability matrices from the
/// coarse adjacency: top-K eigenpairs by magnitude, optional row-norm
/// pruning, pure-row selection by successive projection, then
/// `Phi_hat = V X_pure^-1` with thresholding and row normalization, and
/// `P_hat = X_pure Lambda X_pure'`.
pub fn mm_community_estimate(
    gt: &CoarseGraph,
    k: usize,
    prune_quantile: Option<f64>,
) -> Result<MMEstimate> {
    let m = gt.m();
    if k == 0 || m < k {
        return Err(Error::InvalidParameter(format!(
            "need m >= K >= 1 (m = {m}, K = {k})"
        )));
    }
    let eig = SymEigen::new(&gt.a_tilde)?;
    // Indices of the K eigenvalues of largest magnitude.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        eig.values[j]
            .abs()
            .partial_cmp(&eig.values[i].abs())
            .unwrap()
    });
    let top = &order[..k];
    let mut v_hat = Array2::<f64>::zeros((m, k));
    let mut eigvals = Array1::<f64>::zeros(k);
    for (col, &j) in top.iter().enumerate() {
        eigvals[col] = eig.values[j];
        for row in 0..m {
            v_hat[[row, col]] = eig.vectors[[j, row]];
        }
    }

    let row_norms: Vec<f64> = (0..m)
        .map(|i| v_hat.row(i).dot(&v_hat.row(i)).sqrt())
        .collect();
    let pruned_indices = prune_rows(&row_norms, prune_quantile)?;
    let kept: Vec<usize> = (0..m).filter(|i| !pruned_indices.contains(i)).collect();
    if kept.len() < k {
        return Err(Error::OverPruned {
            kept: kept.len(),
            need: k,
        });
    }

    let mut candidates = Array2::<f64>::zeros((kept.len(), k));
    for (r, &i) in kept.iter().enumerate() {
        candidates.row_mut(r).assign(&v_hat.row(i));
    }
    let selected = successive_projection(&candidates, k)?;
    let pure_indices: Vec<usize> = selected.iter().map(|&r| kept[r]).collect();

    let mut x_pure = Array2::<f64>::zeros((k, k));
    for (r, &i) in pure_indices.iter().enumerate() {
        x_pure.row_mut(r).assign(&v_hat.row(i));
    }
    let (x_inv, cond) = linalg::invert_small(&x_pure)?;
    if cond > PURE_ROW_COND_LIMIT {
        return Err(Error::RankDeficient(PURE_ROW_COND_LIMIT));
    }

    let mut phi_hat = v_hat.dot(&x_inv);
    phi_hat.mapv_inplace(|x| if x < MEMBERSHIP_FLOOR { 0.0 } else { x });
    for (i, mut row) in phi_hat.rows_mut().into_iter().enumerate() {
        let s = row.sum();
        if s <= 0.0 {
            return Err(Error::ZeroMembershipRow(i));
        }
        row /= s;
    }

    let lambda = Array2::from_diag(&eigvals);
    let p_hat = x_pure.dot(&lambda).dot(&x_pure.t());
    let p_hat = 0.5 * (&p_hat + &p_hat.t());

    Ok(MMEstimate {
        phi_hat,
        p_hat,
        pure_indices,
        pruned_indices,
        eigvals,
    })
}

/// Rows whose norm strictly exceeds the `q`-quantile of all row norms.
/// `None` or `q = 1.0` disables pruning.
fn prune_rows(row_norms: &[f64], prune_quantile: Option<f64>) -> Result<Vec<usize>> {
    let q = match prune_quantile {
        None => return Ok(Vec::new()),
        Some(q) => q,
    };
    if !(0.0 < q && q <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "prune quantile must lie in (0, 1] (got {q})"
        )));
    }
    let m = row_norms.len();
    let mut sorted = row_norms.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((q * m as f64).ceil() as usize).clamp(1, m) - 1;
    let cutoff = sorted[idx];
    Ok((0..m).filter(|&i| row_norms[i] > cutoff).collect())
}

/// Greedy pure-row selection: repeatedly take the row of largest Euclidean
/// norm and project every row onto its orthogonal complement. Ties break
/// toward the lowest index.
pub fn successive_projection(x: &Array2<f64>, k: usize) -> Result<Vec<usize>> {
    let rows = x.nrows();
    if rows < k {
        return Err(Error::InvalidParameter(format!(
            "successive projection needs at least K = {k} rows (got {rows})"
        )));
    }
    let mut work = x.to_owned();
    let mut selected = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = 0usize;
        let mut best_norm = -1.0f64;
        for i in 0..rows {
            let norm2 = work.row(i).dot(&work.row(i));
            if norm2 > best_norm {
                best_norm = norm2;
                best = i;
            }
        }
        if best_norm <= 0.0 {
            return Err(Error::RankDeficient(PURE_ROW_COND_LIMIT));
        }
        selected.push(best);
        let u = work.row(best).to_owned() / best_norm.sqrt();
        for i in 0..rows {
            let proj = work.row(i).dot(&u);
            let mut row = work.row_mut(i);
            for (w, &uj) in row.iter_mut().zip(u.iter()) {
                *w -= proj * uj;
            }
        }
    }
    Ok(selected)
}

/// Turn a community estimate into a controllability estimate:
/// `D_hat` from column masses, `kappa_hat = 1/(a/n + rho(P_hat D_hat))`,
/// the resolvent matrix, and `theta_hat = 1_m + Phi_hat diag(Upsilon_hat)`.
pub fn learned_theta(est: &MMEstimate, a: f64, n: usize) -> Result<LearnedEstimate> {
    let k = est.phi_hat.ncols();
    let col_mass = est.phi_hat.sum_axis(ndarray::Axis(0));
    let total = col_mass.sum();
    let mut d_hat = Array2::<f64>::zeros((k, k));
    for j in 0..k {
        let mass = col_mass[j] / total;
        if mass <= 0.0 {
            return Err(Error::EmptyCommunity(j));
        }
        d_hat[[j, j]] = mass;
    }
    learned_theta_with_sizes(est, d_hat, a, n)
}

/// Variant with the relative-size matrix supplied instead of inferred from
/// the membership columns.
pub fn learned_theta_with_sizes(
    est: &MMEstimate,
    d_hat: Array2<f64>,
    a: f64,
    n: usize,
) -> Result<LearnedEstimate> {
    // kappa with the already density-scaled P_hat, so rho_n = 1 here.
    let kappa_hat = controllability::kappa(a, 1.0, n, &est.p_hat, &d_hat)?;
    let ups = controllability::upsilon(&est.p_hat, &d_hat, kappa_hat)?;
    let theta_hat = 1.0 + est.phi_hat.dot(&ups.diag());
    Ok(LearnedEstimate {
        d_hat,
        kappa_hat,
        upsilon_hat: ups.upsilon,
        theta_hat,
    })
}

/// The reduced-order estimate is the coarse controllability vector itself.
pub fn prom_estimate(gt: &CoarseGraph, a_tilde: f64) -> Result<ControllabilityVector> {
    controllability::theta_coarse(gt, a_tilde)
}

/// Random reference vector with i.i.d. entries uniform on [1, 2].
pub fn baseline_vector<R: Rng>(m: usize, rng: &mut R) -> Array1<f64> {
    Array1::from_iter((0..m).map(|_| rng.gen_range(1.0..2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_floor_is_exp_minus_twelve() {
        assert_abs_diff_eq!(MEMBERSHIP_FLOOR, (-12.0f64).exp(), epsilon = 1e-20);
    }

    #[test]
    fn spa_scaled_basis_rows() {
        let x = array![
            [0.0, 2.0, 0.0],
            [3.0, 0.0, 0.0],
            [0.0, 0.0, 1.0]
        ];
        assert_eq!(successive_projection(&x, 3).unwrap(), vec![1, 0, 2]);
        assert_eq!(successive_projection(&x, 1).unwrap(), vec![1]);
    }

    #[test]
    fn spa_recovers_extreme_rows() {
        // Rows 0..3 are extremes, the rest convex combinations.
        let e = array![[1.0, 0.0, 0.0], [0.0, 1.2, 0.0], [0.0, 0.0, 0.9]];
        let mut x = Array2::<f64>::zeros((7, 3));
        for i in 0..3 {
            x.row_mut(i).assign(&e.row(i));
        }
        let combos = [
            [0.5, 0.5, 0.0],
            [0.2, 0.3, 0.5],
            [0.1, 0.1, 0.8],
            [0.4, 0.2, 0.4],
        ];
        for (i, w) in combos.iter().enumerate() {
            for j in 0..3 {
                for l in 0..3 {
                    x[[3 + i, l]] += w[j] * e[[j, l]];
                }
            }
        }
        let mut got = successive_projection(&x, 3).unwrap();
        got.sort_unstable();
        assert_eq!(got, vec![0, 1, 2]);
    }

    #[test]
    fn mm_identity_case() {
        // m = K with Phi = I: the coarse matrix is P itself.
        let p = array![[0.6, 0.15, 0.05], [0.15, 0.5, 0.1], [0.05, 0.1, 0.4]];
        let gt = CoarseGraph { a_tilde: p.clone() };
        let est = mm_community_estimate(&gt, 3, None).unwrap();
        // Recover up to a column permutation; align by the pure rows.
        let mut perm = [0usize; 3];
        for (col, &row) in est.pure_indices.iter().enumerate() {
            perm[col] = row;
        }
        for i in 0..3 {
            for j in 0..3 {
                let expect = if perm.iter().position(|&x| x == i) == Some(j) {
                    1.0
                } else {
                    0.0
                };
                assert_abs_diff_eq!(est.phi_hat[[i, j]], expect, epsilon = 1e-6);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(
                    est.p_hat[[i, j]],
                    p[[perm[i], perm[j]]],
                    epsilon = 1e-6
                );
            }
        }
    }

    fn noiseless_instance(seed: u64, m: usize, k: usize) -> (Array2<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Array2::<f64>::zeros((k, k));
        for i in 0..k {
            for j in i..k {
                let x: f64 = rng.gen_range(0.05..0.5);
                p[[i, j]] = x;
                p[[j, i]] = x;
            }
        }
        for i in 0..k {
            p[[i, i]] += 0.5;
        }
        let mut phi = Array2::<f64>::zeros((m, k));
        // One pure row per community up front, mixed rows after.
        for i in 0..m {
            if i < k {
                phi[[i, i]] = 1.0;
            } else {
                let mut w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
                let s: f64 = w.iter().sum();
                for v in w.iter_mut() {
                    *v /= s;
                }
                for j in 0..k {
                    phi[[i, j]] = w[j];
                }
            }
        }
        (phi, p)
    }

    #[test]
    fn mm_noiseless_recovery() {
        for seed in 0..5 {
            let (phi, p) = noiseless_instance(seed, 30, 4);
            let a_tilde = phi.dot(&p).dot(&phi.t());
            let gt = CoarseGraph { a_tilde };
            let est = mm_community_estimate(&gt, 4, None).unwrap();
            // Brute-force the best column permutation.
            let best = best_permutation_error(&est.phi_hat, &phi);
            assert!(best.0 < 1e-6, "seed {seed}: phi error {}", best.0);
            let perm = best.1;
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(
                        est.p_hat[[perm[i], perm[j]]],
                        p[[i, j]],
                        epsilon = 1e-6
                    );
                }
            }
        }
    }

    fn best_permutation_error(phi_hat: &Array2<f64>, phi: &Array2<f64>) -> (f64, Vec<usize>) {
        let k = phi.ncols();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = (f64::INFINITY, perm.clone());
        permute(&mut perm, 0, &mut |p| {
            let mut err = 0.0f64;
            for i in 0..phi.nrows() {
                for j in 0..k {
                    err = err.max((phi_hat[[i, p[j]]] - phi[[i, j]]).abs());
                }
            }
            if err < best.0 {
                best = (err, p.to_vec());
            }
        });
        best
    }

    fn permute(items: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
        if at == items.len() {
            f(items);
            return;
        }
        for i in at..items.len() {
            items.swap(at, i);
            permute(items, at + 1, f);
            items.swap(at, i);
        }
    }

    #[test]
    fn pruning_drops_heavy_rows_only() {
        let norms = vec![1.0, 2.0, 3.0, 4.0];
        assert!(prune_rows(&norms, None).unwrap().is_empty());
        assert!(prune_rows(&norms, Some(1.0)).unwrap().is_empty());
        assert_eq!(prune_rows(&norms, Some(0.5)).unwrap(), vec![2, 3]);
        assert!(prune_rows(&norms, Some(1.5)).is_err());
    }

    #[test]
    fn over_pruning_is_rejected() {
        let (phi, p) = noiseless_instance(1, 10, 4);
        let gt = CoarseGraph {
            a_tilde: phi.dot(&p).dot(&phi.t()),
        };
        assert!(matches!(
            mm_community_estimate(&gt, 4, Some(0.2)),
            Err(Error::OverPruned { .. })
        ));
    }

    #[test]
    fn learned_theta_zero_p() {
        let est = MMEstimate {
            phi_hat: array![[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]],
            p_hat: Array2::zeros((2, 2)),
            pure_indices: vec![0, 2],
            pruned_indices: vec![],
            eigvals: array![0.0, 0.0],
        };
        let l = learned_theta(&est, 1.0, 100).unwrap();
        assert!(l.theta_hat.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn learned_theta_column_permutation_invariance() {
        let (phi, p) = noiseless_instance(3, 12, 3);
        let d = {
            let col = phi.sum_axis(ndarray::Axis(0));
            let tot = col.sum();
            Array2::from_diag(&col.mapv(|x| x / tot))
        };
        let _ = d;
        let est = MMEstimate {
            phi_hat: phi.clone(),
            p_hat: p.clone(),
            pure_indices: vec![0, 1, 2],
            pruned_indices: vec![],
            eigvals: array![0.0, 0.0, 0.0],
        };
        let base = learned_theta(&est, 1.0, 500).unwrap();
        let perm = [2usize, 0, 1];
        let mut phi_p = Array2::<f64>::zeros(phi.dim());
        let mut p_p = Array2::<f64>::zeros(p.dim());
        for j in 0..3 {
            for i in 0..phi.nrows() {
                phi_p[[i, perm[j]]] = phi[[i, j]];
            }
            for l in 0..3 {
                p_p[[perm[j], perm[l]]] = p[[j, l]];
            }
        }
        let est_p = MMEstimate {
            phi_hat: phi_p,
            p_hat: p_p,
            ..est
        };
        let permuted = learned_theta(&est_p, 1.0, 500).unwrap();
        for (a, b) in base.theta_hat.iter().zip(permuted.theta_hat.iter()) {
            approx::assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn learned_matches_closed_form_on_exact_inputs() {
        // With exact (Phi, P, D), theta_hat - 1 must equal
        // n * (r * theta_group_expected - 1) entrywise.
        use crate::coarsening::{self, OverlapParams, SyncMode};
        use crate::sbm::{self, generate_membership};
        let model = sbm::BlockModel::assortative(3, 0.5, 0.1, 0.2).unwrap();
        let assign = generate_membership(300, &[1.0 / 3.0; 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let map = coarsening::sample_coarsening(
            &assign,
            30,
            5,
            SyncMode::Overlap(OverlapParams::new(0.1).unwrap()),
            &mut rng,
        )
        .unwrap();
        let phi = coarsening::coarse_membership(&map, &assign).unwrap();
        let est = MMEstimate {
            phi_hat: phi.phi.clone(),
            p_hat: model.p.clone(),
            pure_indices: vec![],
            pruned_indices: vec![],
            eigvals: array![0.0, 0.0, 0.0],
        };
        let d = crate::sbm::relative_size_matrix(&assign);
        let learned = learned_theta_with_sizes(&est, d, 1.0, assign.n).unwrap();
        let expected = crate::controllability::theta_group_expected(&model, &assign, &map, 1.0)
            .unwrap();
        let n = assign.n as f64;
        let r = map.r as f64;
        for (h, e) in learned.theta_hat.iter().zip(expected.theta.iter()) {
            let rhs = n * (r * e - 1.0);
            approx::assert_relative_eq!(h - 1.0, rhs, max_relative = 1e-10);
        }
    }

    #[test]
    fn baseline_vector_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let v = baseline_vector(1000, &mut rng);
        assert!(v.iter().all(|&x| (1.0..2.0).contains(&x)));
        let mut rng2 = ChaCha8Rng::seed_from_u64(123);
        let v2 = baseline_vector(1000, &mut rng2);
        assert_eq!(v, v2);
        let mut rng3 = ChaCha8Rng::seed_from_u64(7);
        let big = baseline_vector(100_000, &mut rng3);
        let mean = big.sum() / big.len() as f64;
        assert!((mean - 1.5).abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn prom_delegates_to_theta_coarse() {
        let gt = CoarseGraph {
            a_tilde: array![[0.0, 1.0], [1.0, 0.0]],
        };
        let a = prom_estimate(&gt, 1.0).unwrap();
        let b = crate::controllability::theta_coarse(&gt, 1.0).unwrap();
        assert_eq!(a.theta, b.theta);
        let zero = CoarseGraph {
            a_tilde: Array2::zeros((3, 3)),
        };
        let th = prom_estimate(&zero, 1.0).unwrap();
        assert!(th.theta.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }
}
