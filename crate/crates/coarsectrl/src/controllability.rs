//! Average controllability of normalized network dynamics: fine, group and
//! coarse controllability vectors, the K x K resolvent matrix driving the
//! closed-form expected values, and related spectral quantities.

use ndarray::{Array1, Array2};

use crate::coarsening::{coarse_membership, CoarseGraph, CoarseningMap};
use crate::error::{Error, Result};
use crate::linalg::{self, SymEigen};
use crate::sbm::{BlockModel, CommunityAssignment, FineGraph};

/// Which controllability vector a value represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    Fine,
    Group,
    Coarse,
    ExpectedGroup,
    Learned,
}

#[derive(Debug, Clone)]
pub struct ControllabilityVector {
    pub theta: Array1<f64>,
    pub kind: ThetaKind,
}

/// Dynamics matrix scaled to `z / (a + rho(z))`, keeping the eigendecomposition
/// of the scaled matrix for reuse.
#[derive(Debug, Clone)]
pub struct NormalizedDynamics {
    pub z_nom: Array2<f64>,
    pub a_const: f64,
    pub spectral_radius_raw: f64,
    eigen: SymEigen,
}

impl NormalizedDynamics {
    pub fn n(&self) -> usize {
        self.z_nom.nrows()
    }

    /// Spectral radius of the normalized matrix, strictly below 1.
    pub fn spectral_radius_nom(&self) -> f64 {
        self.eigen.spectral_radius()
    }
}

/// K x K resolvent matrix encoding direct and indirect community-level effects.
#[derive(Debug, Clone)]
pub struct UpsilonMatrix {
    pub upsilon: Array2<f64>,
    pub kappa: f64,
}

impl UpsilonMatrix {
    pub fn diag(&self) -> Array1<f64> {
        self.upsilon.diag().to_owned()
    }
}

/// Scale a symmetric matrix by `1 / (a + rho(z))`.
pub fn normalize(z: &Array2<f64>, a: f64) -> Result<NormalizedDynamics> {
    if a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "normalization constant must be positive (got {a})"
        )));
    }
    let raw = SymEigen::new(z)?;
    let rho = raw.spectral_radius();
    let scale = 1.0 / (a + rho);
    let z_nom = z * scale;
    let eigen = SymEigen {
        values: raw.values.mapv(|v| v * scale),
        vectors: raw.vectors,
    };
    Ok(NormalizedDynamics {
        z_nom,
        a_const: a,
        spectral_radius_raw: rho,
        eigen,
    })
}

/// `diag((I - z_nom^2)^-1)` through the eigendecomposition:
/// entry i is `sum_j v_ij^2 / (1 - lambda_j^2)`.
pub fn theta_fine(dyn_: &NormalizedDynamics) -> Result<ControllabilityVector> {
    let n = dyn_.n();
    let mut denom = Vec::with_capacity(n);
    for &lam in dyn_.eigen.values.iter() {
        let d = 1.0 - lam * lam;
        if d <= 0.0 {
            return Err(Error::SpectralRadius(format!(
                "normalized eigenvalue {lam} has |lambda| >= 1"
            )));
        }
        denom.push(d);
    }
    let mut theta = Array1::<f64>::zeros(n);
    for j in 0..n {
        let v = dyn_.eigen.vectors.row(j);
        let inv_d = 1.0 / denom[j];
        for i in 0..n {
            theta[i] += v[i] * v[i] * inv_d;
        }
    }
    Ok(ControllabilityVector {
        theta,
        kind: ThetaKind::Fine,
    })
}

/// Truncated Gramian trace `tr sum_{t<T} z^t Diag(b)^2 z^t`, the brute-force
/// oracle behind every closed-form theta. Cost scales with the number of
/// nonzeros of `b`, each contributing a power iteration.
pub fn gramian_trace_truncated(dyn_: &NormalizedDynamics, b: &[f64], t_max: usize) -> f64 {
    let n = dyn_.n();
    debug_assert_eq!(b.len(), n);
    let mut total = 0.0;
    for (v, &bv) in b.iter().enumerate() {
        if bv == 0.0 {
            continue;
        }
        // w = z^t e_v, accumulated as sum_t ||w||^2.
        let mut w = Array1::<f64>::zeros(n);
        w[v] = 1.0;
        let mut acc = 0.0;
        for t in 0..t_max {
            if t > 0 {
                w = dyn_.z_nom.dot(&w);
            }
            acc += w.dot(&w);
        }
        total += bv * bv * acc;
    }
    total
}

/// Group controllability `(1/r) C theta_fine`; exact by linearity of the trace.
pub fn theta_group(g: &FineGraph, map: &CoarseningMap, a: f64) -> Result<ControllabilityVector> {
    let dyn_ = normalize(&g.a, a)?;
    let fine = theta_fine(&dyn_)?;
    theta_group_from_fine(&fine, map)
}

/// Same contraction applied to an already computed fine vector.
pub fn theta_group_from_fine(
    fine: &ControllabilityVector,
    map: &CoarseningMap,
) -> Result<ControllabilityVector> {
    if fine.theta.len() != map.n {
        return Err(Error::DimensionMismatch(format!(
            "fine vector has n = {}, map expects n = {}",
            fine.theta.len(),
            map.n
        )));
    }
    let scale = 1.0 / (map.r as f64 * map.r as f64);
    let theta = Array1::from_iter(map.supports.iter().map(|row| {
        row.iter().map(|&v| fine.theta[v]).sum::<f64>() * scale
    }));
    Ok(ControllabilityVector {
        theta,
        kind: ThetaKind::Group,
    })
}

/// Nodal controllability of the coarse system, `diag((I - A~_nom^2)^-1)`.
pub fn theta_coarse(gt: &CoarseGraph, a_tilde: f64) -> Result<ControllabilityVector> {
    let dyn_ = normalize(&gt.a_tilde, a_tilde)?;
    let fine = theta_fine(&dyn_)?;
    Ok(ControllabilityVector {
        theta: fine.theta,
        kind: ThetaKind::Coarse,
    })
}

/// Spectral radius of `P_circ D`, computed through the similar symmetric
/// matrix `D^{1/2} P_circ D^{1/2}`.
fn rho_pd(p_circ: &Array2<f64>, d: &Array2<f64>) -> Result<f64> {
    let k = p_circ.nrows();
    let mut sqrt_d = Vec::with_capacity(k);
    for i in 0..k {
        let di = d[[i, i]];
        if di <= 0.0 {
            return Err(Error::EmptyCommunity(i));
        }
        sqrt_d.push(di.sqrt());
    }
    let mut s = p_circ.clone();
    for i in 0..k {
        for j in 0..k {
            s[[i, j]] *= sqrt_d[i] * sqrt_d[j];
        }
    }
    linalg::spectral_radius(&s)
}

/// Normalization factor `kappa = 1 / (a/(rho_n n) + rho(P_circ D))`.
pub fn kappa(a: f64, rho_n: f64, n: usize, p_circ: &Array2<f64>, d: &Array2<f64>) -> Result<f64> {
    let rho = rho_pd(p_circ, d)?;
    let denom = a / (rho_n * n as f64) + rho;
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator(
            "kappa: both a and rho(P_circ D) vanish".into(),
        ));
    }
    Ok(1.0 / denom)
}

/// `Upsilon = D^{-1/2}([I - (kappa D^{1/2} P_circ D^{1/2})^2]^-1 - I)D^{-1/2}`.
pub fn upsilon(p_circ: &Array2<f64>, d: &Array2<f64>, kappa: f64) -> Result<UpsilonMatrix> {
    let k = p_circ.nrows();
    let mut sqrt_d = Vec::with_capacity(k);
    for i in 0..k {
        let di = d[[i, i]];
        if di <= 0.0 {
            return Err(Error::EmptyCommunity(i));
        }
        sqrt_d.push(di.sqrt());
    }
    let mut s = p_circ.clone();
    for i in 0..k {
        for j in 0..k {
            s[[i, j]] *= kappa * sqrt_d[i] * sqrt_d[j];
        }
    }
    let rho_s = linalg::spectral_radius(&s)?;
    if rho_s >= 1.0 {
        return Err(Error::Resolvent(format!(
            "kappa * rho(D^1/2 P D^1/2) = {rho_s} >= 1"
        )));
    }
    let s2 = s.dot(&s);
    let lhs = Array2::eye(k) - &s2;
    let (inv, _) = linalg::invert_small(&lhs)?;
    let mut upsilon = inv - Array2::<f64>::eye(k);
    for i in 0..k {
        for j in 0..k {
            upsilon[[i, j]] /= sqrt_d[i] * sqrt_d[j];
        }
    }
    // Symmetrize away the last bits of roundoff.
    let upsilon = 0.5 * (&upsilon + &upsilon.t());
    Ok(UpsilonMatrix { upsilon, kappa })
}

/// Dual series form `kappa^2 (I - (kappa P_circ D)^2)^-1 P_circ D P_circ`,
/// kept as an independent oracle for the symmetric formula above.
pub fn upsilon_dual(p_circ: &Array2<f64>, d: &Array2<f64>, kappa: f64) -> Result<Array2<f64>> {
    let k = p_circ.nrows();
    let pd = p_circ.dot(d);
    let q = pd.mapv(|x| kappa * x);
    let q2 = q.dot(&q);
    let lhs = Array2::eye(k) - &q2;
    let (inv, _) = linalg::invert_small(&lhs)?;
    let pdp = p_circ.dot(d).dot(p_circ);
    Ok(inv.dot(&pdp).mapv(|x| kappa * kappa * x))
}

/// Closed-form fine controllability of the expected dynamics:
/// `1_n + (1/n) Psi' diag(Upsilon)`.
pub fn theta_fine_expected(
    model: &BlockModel,
    assign: &CommunityAssignment,
    a: f64,
) -> Result<ControllabilityVector> {
    let d = crate::sbm::relative_size_matrix(assign);
    let kap = kappa(a, model.rho, assign.n, &model.p_circ, &d)?;
    let ups = upsilon(&model.p_circ, &d, kap)?;
    let diag = ups.diag();
    let inv_n = 1.0 / assign.n as f64;
    let theta = Array1::from_iter(
        assign
            .labels
            .iter()
            .map(|&c| 1.0 + inv_n * diag[c]),
    );
    Ok(ControllabilityVector {
        theta,
        kind: ThetaKind::Fine,
    })
}

/// Closed-form expected group controllability:
/// `(1/r)(1_m + (1/n) Phi diag(Upsilon))`.
pub fn theta_group_expected(
    model: &BlockModel,
    assign: &CommunityAssignment,
    map: &CoarseningMap,
    a: f64,
) -> Result<ControllabilityVector> {
    let d = crate::sbm::relative_size_matrix(assign);
    let kap = kappa(a, model.rho, assign.n, &model.p_circ, &d)?;
    let ups = upsilon(&model.p_circ, &d, kap)?;
    let phi = coarse_membership(map, assign)?;
    let contrib = phi.phi.dot(&ups.diag());
    let inv_n = 1.0 / assign.n as f64;
    let inv_r = 1.0 / map.r as f64;
    let theta = contrib.mapv(|x| inv_r * (1.0 + inv_n * x));
    Ok(ControllabilityVector {
        theta,
        kind: ThetaKind::ExpectedGroup,
    })
}

/// Returns `(rho(expected adjacency), n * rho(P D))`; the two coincide.
pub fn spectral_identity_check(
    model: &BlockModel,
    assign: &CommunityAssignment,
) -> Result<(f64, f64)> {
    let abar = crate::sbm::expected_adjacency(model, assign);
    let lhs = linalg::spectral_radius(&abar)?;
    let d = crate::sbm::relative_size_matrix(assign);
    // rho(P D) through the similar symmetric product, tolerating empty
    // communities by restricting to the positive-size block.
    let k = model.k;
    let mut s = model.p.clone();
    for i in 0..k {
        for j in 0..k {
            s[[i, j]] *= (d[[i, i]] * d[[j, j]]).sqrt();
        }
    }
    let rhs = assign.n as f64 * linalg::spectral_radius(&s)?;
    Ok((lhs, rhs))
}
