//! Self-contained identity checks cross-validating the closed forms against
//! brute-force oracles, plus the printable worked example.

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coarsening::{self, CoarseningMap, OverlapParams, SyncMode};
use crate::controllability;
use crate::error::Result;
use crate::sbm::{self, FineGraph};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Run every identity check; all must pass on a healthy build.
pub fn run_identity_checks() -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_example1()?,
        check_group_vs_series()?,
        check_expected_group_closed_form()?,
        check_resolvent_vs_series()?,
        check_spectral_identity()?,
        check_upsilon_dual()?,
    ])
}

fn report(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        pass: worst <= tol,
        detail: format!("worst deviation {worst:.3e} (tolerance {tol:.0e})"),
    }
}

/// The 8-node worked example: known membership, coarsening and overlap
/// matrices, reproduced exactly.
fn check_example1() -> Result<CheckResult> {
    let ex = example1()?;
    let phi_expected = array![
        [1.0, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.5, 0.5]
    ];
    let overlap_expected = array![
        [5.0 / 16.0, 1.0 / 16.0, 0.0],
        [1.0 / 16.0, 6.0 / 16.0, 1.0 / 16.0],
        [0.0, 1.0 / 16.0, 1.0 / 16.0]
    ];
    let d_expected = Array2::from_diag(&array![3.0 / 8.0, 0.5, 1.0 / 8.0]);
    let pass = ex.phi == phi_expected && ex.overlap == overlap_expected && ex.d == d_expected;
    Ok(CheckResult {
        name: "example1 exact matrices",
        pass,
        detail: if pass {
            "Psi, C, Phi, D, Phi'Phi/m all match".to_string()
        } else {
            "matrix mismatch".to_string()
        },
    })
}

/// Group controllability is the contraction of the fine vector; both sides
/// computed independently, the left through per-group truncated Gramians.
fn check_group_vs_series() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let model = sbm::BlockModel::assortative(3, 0.6, 0.2, 0.8)?;
        let assign = sbm::generate_membership(48, &[1.0 / 3.0; 3])?;
        let g = sbm::sample_fine_graph(&model, &assign, &mut rng)?;
        let map = coarsening::sample_coarsening(
            &assign,
            12,
            4,
            SyncMode::Overlap(OverlapParams::new(0.2)?),
            &mut rng,
        )?;
        let th = controllability::theta_group(&g, &map, 1.0)?;
        let dyn_ = controllability::normalize(&g.a, 1.0)?;
        let c = map.c();
        for i in 0..map.m {
            let b: Vec<f64> = c.row(i).to_vec();
            let oracle = controllability::gramian_trace_truncated(&dyn_, &b, 500);
            worst = worst.max(((th.theta[i] - oracle) / oracle).abs());
        }
    }
    Ok(report("group vector vs per-group Gramian series", worst, 1e-8))
}

/// Closed-form expected group controllability equals the dense resolvent on
/// the expected adjacency.
fn check_expected_group_closed_form() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..3u64 {
        let mut p = Array2::<f64>::zeros((3, 3));
        for i in 0..3 {
            for j in i..3 {
                let x: f64 = rng.gen_range(0.1..0.9);
                p[[i, j]] = x;
                p[[j, i]] = x;
            }
        }
        let pi = [0.4, 0.35, 0.25];
        let model = sbm::BlockModel::new(pi.to_vec(), 0.3, p)?;
        let assign = sbm::generate_membership(240, &pi)?;
        let map = coarsening::sample_coarsening(
            &assign,
            20,
            6,
            SyncMode::Overlap(OverlapParams::new(0.2)?),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )?;
        let closed = controllability::theta_group_expected(&model, &assign, &map, 1.0)?;
        let abar = sbm::expected_adjacency(&model, &assign);
        let direct = controllability::theta_group(&FineGraph { a: abar }, &map, 1.0)?;
        for (a, b) in closed.theta.iter().zip(direct.theta.iter()) {
            worst = worst.max(((a - b) / b).abs());
        }
    }
    Ok(report("expected group closed form vs dense resolvent", worst, 1e-8))
}

/// Eigendecomposition-based resolvent diagonals match the truncated series.
fn check_resolvent_vs_series() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let n = 16;
        let mut z = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                z[[i, j]] = x;
                z[[j, i]] = x;
            }
        }
        let dyn_ = controllability::normalize(&z, 1.0)?;
        // Horizon long enough that rho^(2T) < 1e-12.
        let rho = dyn_.spectral_radius_nom();
        let t = ((1e-12f64.ln() / (rho * rho).ln()).ceil() as usize).clamp(10, 20_000);
        let th = controllability::theta_fine(&dyn_)?;
        for i in 0..n {
            let mut b = vec![0.0; n];
            b[i] = 1.0;
            let oracle = controllability::gramian_trace_truncated(&dyn_, &b, t);
            worst = worst.max(((th.theta[i] - oracle) / oracle).abs());
        }
    }
    Ok(report("resolvent diagonal vs truncated series", worst, 1e-8))
}

/// Spectral radius of the expected adjacency equals `n * rho(P D)`.
fn check_spectral_identity() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        let k = 3;
        let mut p = Array2::<f64>::zeros((k, k));
        for i in 0..k {
            for j in i..k {
                let x: f64 = rng.gen_range(0.05..0.95);
                p[[i, j]] = x;
                p[[j, i]] = x;
            }
        }
        let pi = [0.5, 0.3, 0.2];
        let model = sbm::BlockModel::new(pi.to_vec(), 0.6, p)?;
        let assign = sbm::generate_membership(60, &pi)?;
        let (lhs, rhs) = controllability::spectral_identity_check(&model, &assign)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(report("spectral radius identity rho(Abar) = n rho(PD)", worst, 1e-9))
}

/// The symmetric and the series form of the resolvent matrix agree.
fn check_upsilon_dual() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let k = 4;
        let mut p = Array2::<f64>::zeros((k, k));
        for i in 0..k {
            for j in i..k {
                let x: f64 = rng.gen_range(0.05..0.9);
                p[[i, j]] = x;
                p[[j, i]] = x;
            }
        }
        let mut pi = vec![0.0; k];
        let mut s = 0.0;
        for v in pi.iter_mut() {
            *v = rng.gen_range(0.1..1.0);
            s += *v;
        }
        let d = Array2::from_diag(&ndarray::Array1::from_iter(pi.iter().map(|v| v / s)));
        let kap = controllability::kappa(1.0, 0.2, 400, &p, &d)?;
        let u = controllability::upsilon(&p, &d, kap)?;
        let dual = controllability::upsilon_dual(&p, &d, kap)?;
        for (a, b) in u.upsilon.iter().zip(dual.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(report("resolvent matrix dual-form equivalence", worst, 1e-10))
}

/// The fixed 8-node worked example.
pub struct Example1 {
    pub psi: Array2<f64>,
    pub c: Array2<f64>,
    pub phi: Array2<f64>,
    pub d: Array2<f64>,
    pub overlap: Array2<f64>,
}

pub fn example1() -> Result<Example1> {
    let assign = sbm::generate_membership(8, &[3.0 / 8.0, 0.5, 1.0 / 8.0])?;
    let map = CoarseningMap::from_supports(
        8,
        2,
        vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]],
    )?;
    let phi = coarsening::coarse_membership(&map, &assign)?;
    let d = sbm::relative_size_matrix(&assign);
    let overlap = phi.overlap_matrix();
    Ok(Example1 {
        psi: assign.psi(),
        c: map.c(),
        phi: phi.phi,
        d,
        overlap,
    })
}

/// Human-readable rendering of the worked example.
pub fn example1_report() -> Result<String> {
    let ex = example1()?;
    let mut out = String::new();
    out.push_str("8 fine nodes, 3 communities of sizes [3, 4, 1], 4 coarse nodes of size r = 2\n\n");
    out.push_str("Psi (community membership, K x n):\n");
    push_matrix(&mut out, &ex.psi);
    out.push_str("\nC (coarse measurement, m x n):\n");
    push_matrix(&mut out, &ex.c);
    out.push_str("\nPhi = C Psi' (coarse membership, m x K):\n");
    push_matrix(&mut out, &ex.phi);
    out.push_str("\nD (relative community sizes):\n");
    push_matrix(&mut out, &ex.d);
    out.push_str("\nPhi' Phi / m (community correlation):\n");
    push_matrix(&mut out, &ex.overlap);
    Ok(out)
}

fn push_matrix(out: &mut String, mat: &Array2<f64>) {
    for row in mat.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:7.4}")).collect();
        out.push_str("  [");
        out.push_str(&cells.join(" "));
        out.push_str("]\n");
    }
}
