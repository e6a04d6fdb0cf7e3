//! Coarse measurements of a fine graph: the Dirichlet-driven sampler for the
//! coarse-measurement matrix, the coarse adjacency, the coarse community
//! membership, and synchronization statistics.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Dirichlet, Distribution};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sbm::{BlockModel, CommunityAssignment, FineGraph};

/// Dirichlet concentration for the overlap of each coarse node with the
/// non-dominant communities.
#[derive(Debug, Clone, Copy)]
pub struct OverlapParams {
    pub omega: f64,
}

impl OverlapParams {
    pub fn new(omega: f64) -> Result<Self> {
        if !(0.0 < omega && omega < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must lie in (0, 1) (got {omega})"
            )));
        }
        Ok(OverlapParams { omega })
    }
}

/// How row supports are spread over communities when sampling a coarsening.
#[derive(Debug, Clone, Copy)]
pub enum SyncMode {
    /// The 3-step Dirichlet process with overlap parameter omega.
    Overlap(OverlapParams),
    /// Each row is drawn entirely from its dominant community (the limit of
    /// vanishing omega, realized as a point mass to avoid degenerate
    /// Dirichlet sampling).
    PerfectSync,
}

/// Coarse-measurement matrix with m rows of fixed support size r; each row is
/// `1/r` on its support, and supports are pairwise disjoint.
#[derive(Debug, Clone)]
pub struct CoarseningMap {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub supports: Vec<Vec<usize>>,
}

impl CoarseningMap {
    pub fn from_supports(n: usize, r: usize, supports: Vec<Vec<usize>>) -> Result<Self> {
        let m = supports.len();
        if m * r > n {
            return Err(Error::Infeasible {
                requested: m * r,
                available: n,
            });
        }
        let mut seen = vec![false; n];
        for row in &supports {
            if row.len() != r {
                return Err(Error::InvalidParameter(format!(
                    "row support has {} indices, expected r = {r}",
                    row.len()
                )));
            }
            for &v in row {
                if v >= n {
                    return Err(Error::InvalidParameter(format!(
                        "support index {v} out of range for n = {n}"
                    )));
                }
                if seen[v] {
                    return Err(Error::InvalidParameter(format!(
                        "node {v} appears in two supports"
                    )));
                }
                seen[v] = true;
            }
        }
        Ok(CoarseningMap { m, n, r, supports })
    }

    /// Dense m x n matrix with `1/r` on each support.
    pub fn c(&self) -> Array2<f64> {
        let mut c = Array2::<f64>::zeros((self.m, self.n));
        let w = 1.0 / self.r as f64;
        for (i, row) in self.supports.iter().enumerate() {
            for &v in row {
                c[[i, v]] = w;
            }
        }
        c
    }
}

/// Symmetric coarse adjacency with entries in [0, 1].
#[derive(Debug, Clone)]
pub struct CoarseGraph {
    pub a_tilde: Array2<f64>,
}

impl CoarseGraph {
    pub fn m(&self) -> usize {
        self.a_tilde.nrows()
    }
}

/// Row-stochastic m x K matrix `Phi = C * psi'`; entries are multiples of 1/r.
#[derive(Debug, Clone)]
pub struct CoarseMembership {
    pub phi: Array2<f64>,
}

impl CoarseMembership {
    pub fn m(&self) -> usize {
        self.phi.nrows()
    }

    pub fn k(&self) -> usize {
        self.phi.ncols()
    }

    /// `Phi' Phi / m`, the community correlation matrix.
    pub fn overlap_matrix(&self) -> Array2<f64> {
        let mut g = self.phi.t().dot(&self.phi);
        g /= self.m() as f64;
        g
    }
}

/// Synchronization summary of a coarse membership matrix.
#[derive(Debug, Clone)]
pub struct SyncStats {
    pub support_sizes: Vec<usize>,
    pub perfect_sync: bool,
    pub overlap_matrix: Array2<f64>,
    /// `||D - Phi' Phi / m||_max`.
    pub balancedness_gap: f64,
}

/// Sample row supports by the 3-step process: draw a dominant community per
/// row, draw a Dirichlet allocation over communities, then take
/// `floor(r * weight_k)` unselected nodes from each community's pool.
/// Floor shortfall goes to the dominant community, falling back to the
/// community with the largest remaining pool.
pub fn sample_coarsening<R: Rng>(
    assign: &CommunityAssignment,
    m: usize,
    r: usize,
    mode: SyncMode,
    rng: &mut R,
) -> Result<CoarseningMap> {
    let n = assign.n;
    let k = assign.k();
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if m * r > n {
        return Err(Error::Infeasible {
            requested: m * r,
            available: n,
        });
    }
    // Unselected node pools per community, in ascending node order.
    let mut pools: Vec<Vec<usize>> = assign
        .ranges()
        .into_iter()
        .map(|range| range.collect())
        .collect();
    let mut supports = Vec::with_capacity(m);
    for _ in 0..m {
        let dominant = sample_categorical(&assign_pi(assign), rng);
        let weights = match mode {
            SyncMode::PerfectSync => {
                let mut w = vec![0.0; k];
                w[dominant] = 1.0;
                w
            }
            SyncMode::Overlap(params) => {
                if k == 1 {
                    vec![1.0]
                } else {
                    let mut alpha = vec![params.omega; k];
                    alpha[dominant] = 1.0;
                    let dir = Dirichlet::new(&alpha).map_err(|e| {
                        Error::InvalidParameter(format!("dirichlet: {e}"))
                    })?;
                    dir.sample(rng)
                }
            }
        };
        let mut support = Vec::with_capacity(r);
        let mut taken = vec![0usize; k];
        for c in 0..k {
            let want = (r as f64 * weights[c]).floor() as usize;
            let got = want.min(pools[c].len());
            draw_from_pool(&mut pools[c], got, rng, &mut support);
            taken[c] = got;
        }
        // Shortfall from floors (and any exhausted pool): dominant community
        // first, then whichever pool is largest.
        while support.len() < r {
            let c = if !pools[dominant].is_empty() {
                dominant
            } else {
                let largest = (0..k).max_by_key(|&c| pools[c].len()).unwrap();
                if pools[largest].is_empty() {
                    return Err(Error::PoolExhausted);
                }
                largest
            };
            draw_from_pool(&mut pools[c], 1, rng, &mut support);
        }
        support.sort_unstable();
        supports.push(support);
    }
    CoarseningMap::from_supports(n, r, supports)
}

fn assign_pi(assign: &CommunityAssignment) -> Vec<f64> {
    assign
        .community_sizes
        .iter()
        .map(|&s| s as f64 / assign.n as f64)
        .collect()
}

fn sample_categorical<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Move `count` uniformly chosen nodes from `pool` into `out`.
fn draw_from_pool<R: Rng>(pool: &mut Vec<usize>, count: usize, rng: &mut R, out: &mut Vec<usize>) {
    for _ in 0..count {
        let idx = rng.gen_range(0..pool.len());
        out.push(pool.swap_remove(idx));
    }
}

/// Coarse adjacency `C A C'`, computed through the disjoint supports.
pub fn coarse_adjacency(map: &CoarseningMap, g: &FineGraph) -> Result<CoarseGraph> {
    if g.n() != map.n {
        return Err(Error::DimensionMismatch(format!(
            "graph has n = {}, map expects n = {}",
            g.n(),
            map.n
        )));
    }
    let m = map.m;
    let scale = 1.0 / (map.r as f64 * map.r as f64);
    let mut a_tilde = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        for j in i..m {
            let mut sum = 0.0;
            for &u in &map.supports[i] {
                for &v in &map.supports[j] {
                    sum += g.a[[u, v]];
                }
            }
            let val = scale * sum;
            a_tilde[[i, j]] = val;
            a_tilde[[j, i]] = val;
        }
    }
    Ok(CoarseGraph { a_tilde })
}

/// Coarse membership `Phi = C psi'`; entry (i, k) is the fraction of row i's
/// support lying in community k.
pub fn coarse_membership(
    map: &CoarseningMap,
    assign: &CommunityAssignment,
) -> Result<CoarseMembership> {
    if assign.n != map.n {
        return Err(Error::DimensionMismatch(format!(
            "assignment has n = {}, map expects n = {}",
            assign.n, map.n
        )));
    }
    let k = assign.k();
    let mut phi = Array2::<f64>::zeros((map.m, k));
    let w = 1.0 / map.r as f64;
    for (i, row) in map.supports.iter().enumerate() {
        for &v in row {
            phi[[i, assign.labels[v]]] += w;
        }
    }
    Ok(CoarseMembership { phi })
}

/// Per-row support sizes, the perfect-sync flag, the overlap matrix, and the
/// balancedness gap `||D - Phi' Phi / m||_max`.
pub fn sync_stats(phi: &CoarseMembership, d: &Array2<f64>) -> SyncStats {
    let support_sizes: Vec<usize> = phi
        .phi
        .rows()
        .into_iter()
        .map(|row| row.iter().filter(|&&x| x != 0.0).count())
        .collect();
    let perfect_sync = support_sizes.iter().all(|&s| s == 1);
    let overlap_matrix = phi.overlap_matrix();
    let gap = &overlap_matrix - d;
    SyncStats {
        support_sizes,
        perfect_sync,
        overlap_matrix,
        balancedness_gap: linalg::max_norm(&gap),
    }
}

/// Expected coarse adjacency `Phi P Phi'`.
pub fn expected_coarse(phi: &CoarseMembership, model: &BlockModel) -> Array2<f64> {
    phi.phi.dot(&model.p).dot(&phi.phi.t())
}
