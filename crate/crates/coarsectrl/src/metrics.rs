//! Scale-invariant l1 error metrics, empirical Gramian deviations, and the
//! interpretable diagnostic terms from the theory.

use ndarray::{Array1, Array2};

use crate::coarsening::{self, CoarseGraph, CoarseMembership, CoarseningMap};
use crate::controllability::{self, ControllabilityVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sbm::{BlockModel, CommunityAssignment, FineGraph};

/// Guard below which a shifted vector counts as degenerate (all entries 1).
pub const DEGENERATE_NORM_TOL: f64 = 1e-14;

/// Diagnostic terms mirroring the coverage bound: concentration scales
/// epsilon and epsilon_tilde, the synchronization bias, and the
/// balancedness gap.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Thm1Terms {
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    pub sync_bias: f64,
    pub balancedness_gap: f64,
}

/// Estimation errors of the spectral community estimate after column
/// alignment to the ground truth.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Thm2Terms {
    pub e_phi_norm: f64,
    pub e_p_max: f64,
    pub e_d_max: f64,
}

/// `|| (u - 1)/||u - 1||_1 - (v - 1)/||v - 1||_1 ||_1`; scale invariant in
/// each shifted argument.
pub fn delta_generic(u: &Array1<f64>, v: &Array1<f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "delta of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let nu: f64 = u.iter().map(|x| (x - 1.0).abs()).sum();
    let nv: f64 = v.iter().map(|x| (x - 1.0).abs()).sum();
    if nu < DEGENERATE_NORM_TOL {
        return Err(Error::DegenerateVector(nu));
    }
    if nv < DEGENERATE_NORM_TOL {
        return Err(Error::DegenerateVector(nv));
    }
    Ok(u
        .iter()
        .zip(v.iter())
        .map(|(a, b)| ((a - 1.0) / nu - (b - 1.0) / nv).abs())
        .sum())
}

/// Upper bound `2 ||u - v||_1 / max(||u - 1||_1, ||v - 1||_1)` on
/// `delta_generic(u, v)`.
pub fn delta_upper_bound(u: &Array1<f64>, v: &Array1<f64>) -> f64 {
    let nu: f64 = u.iter().map(|x| (x - 1.0).abs()).sum();
    let nv: f64 = v.iter().map(|x| (x - 1.0).abs()).sum();
    let diff: f64 = u.iter().zip(v.iter()).map(|(a, b)| (a - b).abs()).sum();
    2.0 * diff / nu.max(nv)
}

/// Reduced-model error: `delta_generic(r * theta_group, theta_coarse)`.
pub fn delta_prom(
    theta_group: &ControllabilityVector,
    theta_coarse: &ControllabilityVector,
    r: usize,
) -> Result<f64> {
    let scaled = theta_group.theta.mapv(|x| r as f64 * x);
    delta_generic(&scaled, &theta_coarse.theta)
}

/// Learning error: `delta_generic(theta_hat, r * theta_group)`.
pub fn delta_learned(
    theta_hat: &Array1<f64>,
    theta_group: &ControllabilityVector,
    r: usize,
) -> Result<f64> {
    let scaled = theta_group.theta.mapv(|x| r as f64 * x);
    delta_generic(theta_hat, &scaled)
}

/// Concentration and bias diagnostics of the coverage bound, computed from
/// ground truth in simulation mode.
pub fn thm1_diagnostics(
    model: &BlockModel,
    assign: &CommunityAssignment,
    map: &CoarseningMap,
    a: f64,
    delta_prob: f64,
) -> Result<Thm1Terms> {
    if !(0.0 < delta_prob && delta_prob < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_prob must lie in (0, 1) (got {delta_prob})"
        )));
    }
    let n = assign.n as f64;
    let m = map.m as f64;
    let d = crate::sbm::relative_size_matrix(assign);
    let phi = coarsening::coarse_membership(map, assign)?;
    let g = phi.overlap_matrix();

    let pdp = model.p.dot(&d).dot(&model.p);
    let pdp_min = linalg::min_abs_entry(&pdp);
    if pdp_min == 0.0 {
        return Err(Error::ZeroDenominator(
            "||P D P||_min = 0 (disconnected block model)".into(),
        ));
    }
    let epsilon = ((n * n / delta_prob).ln() / (2.0 * n)).sqrt() / pdp_min;

    let pgp = model.p.dot(&g).dot(&model.p);
    let pgp_min = linalg::min_abs_entry(&pgp);
    if pgp_min == 0.0 {
        return Err(Error::ZeroDenominator(
            "||P (Phi'Phi/m) P||_min = 0".into(),
        ));
    }
    let epsilon_tilde = ((m * m / delta_prob).ln() / (2.0 * m)).sqrt() / pgp_min;

    let kap = controllability::kappa(a, model.rho, assign.n, &model.p_circ, &d)?;
    let ups = controllability::upsilon(&model.p_circ, &d, kap)?;
    let sync_bias = sync_bias(&phi, &ups.upsilon);

    let gap = &g - &d;
    Ok(Thm1Terms {
        epsilon,
        epsilon_tilde,
        sync_bias,
        balancedness_gap: linalg::max_norm(&gap),
    })
}

/// `||Phi diag(Upsilon) - diag(Phi Upsilon Phi')||_1 / m`; zero under
/// perfect synchronization.
pub fn sync_bias(phi: &CoarseMembership, upsilon: &Array2<f64>) -> f64 {
    let m = phi.m();
    let direct = phi.phi.dot(&upsilon.diag().to_owned());
    let full = phi.phi.dot(upsilon).dot(&phi.phi.t());
    let mut acc = 0.0;
    for i in 0..m {
        acc += (direct[i] - full[[i, i]]).abs();
    }
    acc / m as f64
}

/// Estimation errors after aligning estimated community columns to the truth
/// with an exact assignment on the l1 matching cost.
pub fn thm2_diagnostics(
    phi_hat: &Array2<f64>,
    p_hat: &Array2<f64>,
    d_hat: &Array2<f64>,
    phi: &Array2<f64>,
    p: &Array2<f64>,
    d: &Array2<f64>,
) -> Result<Thm2Terms> {
    let (m, k) = (phi.nrows(), phi.ncols());
    if phi_hat.dim() != (m, k) || p_hat.dim() != (k, k) || d_hat.dim() != (k, k) {
        return Err(Error::DimensionMismatch(
            "estimate dimensions do not match the truth".into(),
        ));
    }
    // Cost of mapping estimated column j to true column i.
    let mut cost = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            let mut c = 0.0;
            for row in 0..m {
                c += (phi_hat[[row, j]] - phi[[row, i]]).abs();
            }
            cost[[i, j]] = c;
        }
    }
    let perm = hungarian(&cost);
    // perm[i] = estimated column assigned to true column i.
    let mut e_phi = 0.0;
    for i in 0..k {
        for row in 0..m {
            e_phi += (phi_hat[[row, perm[i]]] - phi[[row, i]]).abs();
        }
    }
    let mut e_p: f64 = 0.0;
    let mut e_d: f64 = 0.0;
    for i in 0..k {
        e_d = e_d.max((d_hat[[perm[i], perm[i]]] - d[[i, i]]).abs());
        for j in 0..k {
            e_p = e_p.max((p_hat[[perm[i], perm[j]]] - p[[i, j]]).abs());
        }
    }
    Ok(Thm2Terms {
        e_phi_norm: e_phi / m as f64,
        e_p_max: e_p,
        e_d_max: e_d,
    })
}

/// Minimum-cost perfect matching on a square cost matrix; returns `perm`
/// with `perm[row] = column`. Standard O(n^3) algorithm with potentials.
pub fn hungarian(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols());
    // 1-based internal arrays, following the classic formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut p = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}

/// `||theta_fine(A) - theta_fine(E[A])||_1`, with the expected side through
/// the closed form.
pub fn alpha_empirical(
    g: &FineGraph,
    model: &BlockModel,
    assign: &CommunityAssignment,
    a: f64,
) -> Result<f64> {
    let dyn_ = controllability::normalize(&g.a, a)?;
    let fine = controllability::theta_fine(&dyn_)?;
    alpha_from_fine(&fine, model, assign, a)
}

/// Same as `alpha_empirical` for a precomputed fine vector.
pub fn alpha_from_fine(
    fine: &ControllabilityVector,
    model: &BlockModel,
    assign: &CommunityAssignment,
    a: f64,
) -> Result<f64> {
    let expected = controllability::theta_fine_expected(model, assign, a)?;
    Ok(linalg::l1_dist(
        fine.theta.as_slice().unwrap(),
        expected.theta.as_slice().unwrap(),
    ))
}

/// `||theta_coarse(A~) - theta_coarse(Phi P Phi')||_1`.
pub fn alpha_tilde_empirical(
    gt: &CoarseGraph,
    phi: &CoarseMembership,
    model: &BlockModel,
    a_tilde: f64,
) -> Result<f64> {
    let observed = controllability::theta_coarse(gt, a_tilde)?;
    let expected_mat = coarsening::expected_coarse(phi, model);
    let expected = controllability::theta_coarse(
        &CoarseGraph {
            a_tilde: expected_mat,
        },
        a_tilde,
    )?;
    Ok(linalg::l1_dist(
        observed.theta.as_slice().unwrap(),
        expected.theta.as_slice().unwrap(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarsening::CoarseningMap;
    use crate::controllability::ThetaKind;
    use crate::sbm::{self, generate_membership};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn delta_zero_for_equal_and_rescaled() {
        let u = array![2.0, 1.5, 3.0];
        assert_abs_diff_eq!(delta_generic(&u, &u).unwrap(), 0.0, epsilon = 1e-15);
        let v = u.mapv(|x| 1.0 + 3.0 * (x - 1.0));
        assert_abs_diff_eq!(delta_generic(&u, &v).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn delta_disjoint_support_is_two() {
        let u = array![2.0, 1.0];
        let v = array![1.0, 2.0];
        assert_abs_diff_eq!(delta_generic(&u, &v).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn delta_rejects_degenerate() {
        let ones = array![1.0, 1.0];
        let u = array![2.0, 1.0];
        assert!(matches!(
            delta_generic(&ones, &u),
            Err(Error::DegenerateVector(_))
        ));
        assert!(matches!(
            delta_generic(&u, &ones),
            Err(Error::DegenerateVector(_))
        ));
    }

    #[test]
    fn delta_prom_zero_when_exact() {
        let g = ControllabilityVector {
            theta: array![0.3, 0.5, 0.4],
            kind: ThetaKind::Group,
        };
        let c = ControllabilityVector {
            theta: g.theta.mapv(|x| 2.0 * x),
            kind: ThetaKind::Coarse,
        };
        assert_abs_diff_eq!(delta_prom(&g, &c, 2).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn delta_learned_zero_when_exact() {
        let g = ControllabilityVector {
            theta: array![0.6, 0.55, 0.7],
            kind: ThetaKind::Group,
        };
        let hat = g.theta.mapv(|x| 2.0 * x);
        assert_abs_diff_eq!(delta_learned(&hat, &g, 2).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn prop3_bound_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let len = rng.gen_range(2..10);
            let u = Array1::from_iter((0..len).map(|_| rng.gen_range(1.001..3.0)));
            let v = Array1::from_iter((0..len).map(|_| rng.gen_range(1.001..3.0)));
            let d = delta_generic(&u, &v).unwrap();
            assert!(d <= delta_upper_bound(&u, &v) + 1e-12);
            assert!((0.0..=2.0 + 1e-12).contains(&d));
        }
    }

    fn example1() -> (CommunityAssignment, CoarseningMap, BlockModel) {
        let assign = generate_membership(8, &[3.0 / 8.0, 0.5, 1.0 / 8.0]).unwrap();
        let map = CoarseningMap::from_supports(
            8,
            2,
            vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]],
        )
        .unwrap();
        let model = sbm::BlockModel::assortative(3, 0.5, 0.1, 0.5).unwrap();
        (assign, map, model)
    }

    #[test]
    fn thm1_example1_gap() {
        let (assign, map, model) = example1();
        let terms = thm1_diagnostics(&model, &assign, &map, 1.0, 0.05).unwrap();
        // Max entry of |D - Phi'Phi/m| is |1/2 - 6/16| = 1/8 at (1,1).
        assert_abs_diff_eq!(terms.balancedness_gap, 1.0 / 8.0, epsilon = 1e-14);
        assert!(terms.epsilon > 0.0 && terms.epsilon_tilde > 0.0);
    }

    #[test]
    fn thm1_epsilon_monotone_in_delta() {
        let (assign, map, model) = example1();
        let loose = thm1_diagnostics(&model, &assign, &map, 1.0, 0.1).unwrap();
        let tight = thm1_diagnostics(&model, &assign, &map, 1.0, 0.05).unwrap();
        assert!(tight.epsilon > loose.epsilon);
        assert!(tight.epsilon_tilde > loose.epsilon_tilde);
    }

    #[test]
    fn thm1_rejects_disconnected_model() {
        let (assign, map, _) = example1();
        let model = sbm::BlockModel::assortative(3, 0.5, 0.0, 0.5).unwrap();
        // PDP has zero entries when q = 0 and blocks are disjoint.
        assert!(matches!(
            thm1_diagnostics(&model, &assign, &map, 1.0, 0.05),
            Err(Error::ZeroDenominator(_))
        ));
    }

    #[test]
    fn sync_bias_zero_for_pure_rows() {
        let phi = CoarseMembership {
            phi: array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
        };
        let ups = array![[0.7, 0.2], [0.2, 0.9]];
        assert_eq!(sync_bias(&phi, &ups), 0.0);
    }

    #[test]
    fn sync_bias_positive_for_mixed_rows() {
        let phi = CoarseMembership {
            phi: array![[0.5, 0.5], [1.0, 0.0]],
        };
        let ups = array![[0.7, 0.2], [0.2, 0.9]];
        // Mixed row: direct = (0.7+0.9)/2 = 0.8, quadratic = 0.5.
        assert_abs_diff_eq!(sync_bias(&phi, &ups), 0.15, epsilon = 1e-14);
    }

    #[test]
    fn hungarian_identity_and_antidiagonal() {
        let c = array![[0.0, 5.0], [5.0, 0.0]];
        assert_eq!(hungarian(&c), vec![0, 1]);
        let c = array![[5.0, 0.0], [0.0, 5.0]];
        assert_eq!(hungarian(&c), vec![1, 0]);
        let c = array![
            [4.0, 1.0, 3.0],
            [2.0, 0.0, 5.0],
            [3.0, 2.0, 2.0]
        ];
        // Optimal assignment costs 1 + 2 + 2 = 5.
        let perm = hungarian(&c);
        let total: f64 = (0..3).map(|i| c[[i, perm[i]]]).sum();
        assert_abs_diff_eq!(total, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn thm2_exact_estimates_are_zero() {
        let phi = array![[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]];
        let p = array![[0.5, 0.1], [0.1, 0.4]];
        let d = Array2::from_diag(&array![0.6, 0.4]);
        let t = thm2_diagnostics(&phi, &p, &d, &phi, &p, &d).unwrap();
        assert_eq!((t.e_phi_norm, t.e_p_max, t.e_d_max), (0.0, 0.0, 0.0));
    }

    #[test]
    fn thm2_uniform_row_closed_form() {
        let k = 4;
        let m = 8;
        let mut phi = Array2::<f64>::zeros((m, k));
        for i in 0..m {
            phi[[i, i % k]] = 1.0;
        }
        let mut phi_hat = phi.clone();
        for j in 0..k {
            phi_hat[[0, j]] = 1.0 / k as f64;
        }
        let p = Array2::eye(k);
        let d = Array2::from_diag_elem(k, 1.0 / k as f64);
        let t = thm2_diagnostics(&phi_hat, &p, &d, &phi, &p, &d).unwrap();
        let expect = 2.0 * (1.0 - 1.0 / k as f64) / m as f64;
        assert_abs_diff_eq!(t.e_phi_norm, expect, epsilon = 1e-14);
    }

    #[test]
    fn thm2_permutation_invariance() {
        let phi = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.2, 0.3, 0.5]];
        let p = array![[0.5, 0.1, 0.2], [0.1, 0.6, 0.1], [0.2, 0.1, 0.4]];
        let d = Array2::from_diag(&array![0.3, 0.45, 0.25]);
        let perm = [2usize, 0, 1];
        let mut phi_p = Array2::<f64>::zeros(phi.dim());
        let mut p_p = Array2::<f64>::zeros(p.dim());
        let mut d_p = Array2::<f64>::zeros(d.dim());
        for j in 0..3 {
            for i in 0..4 {
                phi_p[[i, perm[j]]] = phi[[i, j]];
            }
            d_p[[perm[j], perm[j]]] = d[[j, j]];
            for l in 0..3 {
                p_p[[perm[j], perm[l]]] = p[[j, l]];
            }
        }
        let t = thm2_diagnostics(&phi_p, &p_p, &d_p, &phi, &p, &d).unwrap();
        assert_abs_diff_eq!(t.e_phi_norm, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.e_p_max, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.e_d_max, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn alpha_zero_for_deterministic_model() {
        // P all-ones with rho = 1 makes every edge sure, so A = E[A].
        let model = sbm::BlockModel::assortative(2, 1.0, 1.0, 1.0).unwrap();
        let assign = generate_membership(20, &[0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = sbm::sample_fine_graph(&model, &assign, &mut rng).unwrap();
        let alpha = alpha_empirical(&g, &model, &assign, 1.0).unwrap();
        assert!(alpha < 1e-6, "alpha = {alpha}");
    }

    #[test]
    fn alpha_tilde_zero_for_deterministic_model() {
        let model = sbm::BlockModel::assortative(2, 1.0, 1.0, 1.0).unwrap();
        let assign = generate_membership(20, &[0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = sbm::sample_fine_graph(&model, &assign, &mut rng).unwrap();
        let map = CoarseningMap::from_supports(
            20,
            4,
            vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![10, 11, 12, 13], vec![15, 16, 17, 18]],
        )
        .unwrap();
        let gt = crate::coarsening::coarse_adjacency(&map, &g).unwrap();
        let phi = crate::coarsening::coarse_membership(&map, &assign).unwrap();
        let at = alpha_tilde_empirical(&gt, &phi, &model, 1.0).unwrap();
        assert!(at < 1e-6, "alpha_tilde = {at}");
    }
}
