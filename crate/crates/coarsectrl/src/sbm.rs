//! General stochastic block model: community assignments, sampled adjacency
//! matrices, and their expected counterparts.

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};

/// Density regime below which [`BlockModel::density_warning`] trips.
pub const DENSITY_WARNING_THRESHOLD: f64 = 10.0;

/// Parameters of the general SBM: `K` communities with relative sizes `pi`,
/// block probabilities `P = rho * p_circ`.
#[derive(Debug, Clone)]
pub struct BlockModel {
    pub k: usize,
    pub pi: Vec<f64>,
    pub rho: f64,
    pub p_circ: Array2<f64>,
    /// Scaled block probability matrix, `rho * p_circ`.
    pub p: Array2<f64>,
}

impl BlockModel {
    pub fn new(pi: Vec<f64>, rho: f64, p_circ: Array2<f64>) -> Result<Self> {
        let k = pi.len();
        if k == 0 {
            return Err(Error::InvalidParameter("pi must be nonempty".into()));
        }
        if pi.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidParameter(
                "pi entries must be strictly positive".into(),
            ));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "pi must sum to 1 (got {total})"
            )));
        }
        if !(0.0 < rho && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in (0, 1] (got {rho})"
            )));
        }
        if p_circ.nrows() != k || p_circ.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "p_circ is {}x{}, expected {k}x{k}",
                p_circ.nrows(),
                p_circ.ncols()
            )));
        }
        for i in 0..k {
            for j in 0..k {
                let v = p_circ[[i, j]];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "p_circ[{i},{j}] = {v} outside [0, 1]"
                    )));
                }
                if (p_circ[[i, j]] - p_circ[[j, i]]).abs() > 1e-12 {
                    return Err(Error::NotSymmetric(
                        (p_circ[[i, j]] - p_circ[[j, i]]).abs(),
                    ));
                }
            }
        }
        let p = &p_circ * rho;
        Ok(BlockModel {
            k,
            pi,
            rho,
            p_circ,
            p,
        })
    }

    /// Uniform relative sizes with intra probability `p` and cross
    /// probability `q` (before scaling by `rho`).
    pub fn assortative(k: usize, p: f64, q: f64, rho: f64) -> Result<Self> {
        let p_circ = Array2::from_shape_fn((k, k), |(i, j)| if i == j { p } else { q });
        BlockModel::new(vec![1.0 / k as f64; k], rho, p_circ)
    }

    /// True when `rho * sqrt(n)` is small enough that the dense-regime
    /// assumptions are questionable for a graph of `n` nodes.
    pub fn density_warning(&self, n: usize) -> bool {
        self.rho * (n as f64).sqrt() < DENSITY_WARNING_THRESHOLD
    }
}

/// Disjoint partition of `n` nodes into `K` contiguous communities.
#[derive(Debug, Clone)]
pub struct CommunityAssignment {
    pub n: usize,
    pub community_sizes: Vec<usize>,
    /// `labels[v]` is the community of node `v`.
    pub labels: Vec<usize>,
}

impl CommunityAssignment {
    pub fn k(&self) -> usize {
        self.community_sizes.len()
    }

    /// The binary K x n membership matrix.
    pub fn psi(&self) -> Array2<f64> {
        let k = self.k();
        let mut psi = Array2::<f64>::zeros((k, self.n));
        for (v, &c) in self.labels.iter().enumerate() {
            psi[[c, v]] = 1.0;
        }
        psi
    }

    /// Node index ranges per community (communities are contiguous).
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.k());
        let mut start = 0;
        for &s in &self.community_sizes {
            out.push(start..start + s);
            start += s;
        }
        out
    }
}

/// Undirected binary fine-scale graph.
#[derive(Debug, Clone)]
pub struct FineGraph {
    pub a: Array2<f64>,
}

impl FineGraph {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// Assign `n` nodes to contiguous communities sized by largest-remainder
/// rounding of `n * pi_k`, ties broken toward the lower index.
pub fn generate_membership(n: usize, pi: &[f64]) -> Result<CommunityAssignment> {
    let k = pi.len();
    if k == 0 || pi.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidParameter(
            "pi entries must be strictly positive".into(),
        ));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "pi must sum to 1 (got {total})"
        )));
    }
    if n < k {
        return Err(Error::InvalidParameter(format!(
            "n = {n} is smaller than the number of communities K = {k}"
        )));
    }
    let targets: Vec<f64> = pi.iter().map(|&x| x * n as f64).collect();
    let mut sizes: Vec<usize> = targets.iter().map(|&t| t.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    // Largest remainder first; equal remainders favor the lower index.
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for i in 0..(n - assigned) {
        sizes[order[i % k]] += 1;
    }
    // Nonempty communities: steal from the largest if rounding starved one.
    for c in 0..k {
        while sizes[c] == 0 {
            let donor = (0..k).max_by_key(|&d| sizes[d]).unwrap();
            sizes[donor] -= 1;
            sizes[c] += 1;
        }
    }
    debug_assert_eq!(sizes.iter().sum::<usize>(), n);
    let mut labels = Vec::with_capacity(n);
    for (c, &s) in sizes.iter().enumerate() {
        labels.extend(std::iter::repeat(c).take(s));
    }
    Ok(CommunityAssignment {
        n,
        community_sizes: sizes,
        labels,
    })
}

/// Assign each node a community label drawn i.i.d. from `pi`. Community sizes
/// become random; expected relative sizes equal `pi`.
pub fn generate_membership_iid<R: Rng>(
    n: usize,
    pi: &[f64],
    rng: &mut R,
) -> Result<CommunityAssignment> {
    let k = pi.len();
    if k == 0 || pi.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidParameter(
            "pi entries must be strictly positive".into(),
        ));
    }
    let mut sizes = vec![0usize; k];
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut c = k - 1;
        for (j, &w) in pi.iter().enumerate() {
            acc += w;
            if u < acc {
                c = j;
                break;
            }
        }
        draws.push(c);
        sizes[c] += 1;
    }
    // Keep the contiguous block layout: sort the drawn labels.
    draws.sort_unstable();
    Ok(CommunityAssignment {
        n,
        community_sizes: sizes,
        labels: draws,
    })
}

/// Sample a symmetric binary adjacency matrix from the model. Entry `(u, v)`
/// with `u <= v` is Bernoulli with the block probability of the endpoint
/// communities; the diagonal is sampled the same way so that `E[A]` matches
/// `expected_adjacency` exactly.
pub fn sample_fine_graph<R: Rng>(
    model: &BlockModel,
    assign: &CommunityAssignment,
    rng: &mut R,
) -> Result<FineGraph> {
    if model.k != assign.k() {
        return Err(Error::DimensionMismatch(format!(
            "model has K = {}, assignment has K = {}",
            model.k,
            assign.k()
        )));
    }
    let n = assign.n;
    let mut a = Array2::<f64>::zeros((n, n));
    for u in 0..n {
        let cu = assign.labels[u];
        for v in u..n {
            let p = model.p[[cu, assign.labels[v]]];
            let edge = if p <= 0.0 {
                false
            } else if p >= 1.0 {
                true
            } else {
                rng.gen::<f64>() < p
            };
            if edge {
                a[[u, v]] = 1.0;
                a[[v, u]] = 1.0;
            }
        }
    }
    Ok(FineGraph { a })
}

/// Expected adjacency `psi' * P * psi`, built directly from the labels.
pub fn expected_adjacency(model: &BlockModel, assign: &CommunityAssignment) -> Array2<f64> {
    let n = assign.n;
    Array2::from_shape_fn((n, n), |(u, v)| {
        model.p[[assign.labels[u], assign.labels[v]]]
    })
}

/// Diagonal matrix of relative community sizes, `(1/n) psi psi'`.
pub fn relative_size_matrix(assign: &CommunityAssignment) -> Array2<f64> {
    let k = assign.k();
    let mut d = Array2::<f64>::zeros((k, k));
    for c in 0..k {
        d[[c, c]] = assign.community_sizes[c] as f64 / assign.n as f64;
    }
    d
}
