//! Config-driven simulation harness: seeded trials, parameter sweeps,
//! deterministic CSV artifacts, and a JSON manifest per run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarsening::{self, OverlapParams, SyncMode};
use crate::controllability;
use crate::error::{Error, Result};
use crate::estimators;
use crate::metrics;
use crate::sbm;

pub const TRIAL_CSV_HEADER: &str = "sweep_var,sweep_value,seed,delta_prom,delta_learned,baseline_error,alpha_n,epsilon,epsilon_tilde,sync_bias,balancedness_gap,e_phi_norm,e_p_max,e_d_max,wall_ms_total";

pub const AGGREGATE_CSV_HEADER: &str = "sweep_var,sweep_value,trials_ok,trials_failed,mean_delta_prom,std_delta_prom,mean_delta_learned,std_delta_learned,mean_baseline_error,std_baseline_error";

/// Full description of a run. Defaults follow the simulation section of the
/// reference setup (n = 5000, K = 4, p = 0.5, q = 0.1, m = 100, r = 10,
/// rho_n = 0.1, omega = 0.05, uniform community sizes).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_rho_n")]
    pub rho_n: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_a")]
    pub a_fine: f64,
    #[serde(default = "default_a")]
    pub a_coarse: f64,
    #[serde(default = "default_delta_prob")]
    pub delta_prob: f64,
    /// Relative community sizes; uniform when absent.
    #[serde(default)]
    pub pi: Option<Vec<f64>>,
    /// Explicit trial seeds; alternative to (master_seed, seed_count).
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub seed_count: Option<usize>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub prune_quantile: Option<f64>,
    #[serde(default)]
    pub perfect_sync: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_n() -> usize {
    5000
}
fn default_m() -> usize {
    100
}
fn default_r() -> usize {
    10
}
fn default_k() -> usize {
    4
}
fn default_p() -> f64 {
    0.5
}
fn default_q() -> f64 {
    0.1
}
fn default_rho_n() -> f64 {
    0.1
}
fn default_omega() -> f64 {
    0.05
}
fn default_a() -> f64 {
    1.0
}
fn default_delta_prob() -> f64 {
    0.05
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config must deserialize")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    M,
    RhoN,
    Omega,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::M => "m",
            SweepVariable::RhoN => "rho_n",
            SweepVariable::Omega => "omega",
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n < self.k {
            return Err(Error::Config(format!(
                "need n >= K >= 1 (n = {}, K = {})",
                self.n, self.k
            )));
        }
        if self.m == 0 || self.r == 0 || self.m * self.r > self.n {
            return Err(Error::Config(format!(
                "need 1 <= m*r <= n (m = {}, r = {}, n = {})",
                self.m, self.r, self.n
            )));
        }
        if !(0.0 < self.rho_n && self.rho_n <= 1.0) {
            return Err(Error::Config(format!("rho_n out of (0, 1]: {}", self.rho_n)));
        }
        if !self.perfect_sync && !(0.0 < self.omega && self.omega < 1.0) {
            return Err(Error::Config(format!("omega out of (0, 1): {}", self.omega)));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} out of [0, 1]: {v}")));
            }
        }
        if self.a_fine <= 0.0 || self.a_coarse <= 0.0 {
            return Err(Error::Config("normalization constants must be positive".into()));
        }
        if !(0.0 < self.delta_prob && self.delta_prob < 1.0) {
            return Err(Error::Config(format!(
                "delta_prob out of (0, 1): {}",
                self.delta_prob
            )));
        }
        if let Some(pi) = &self.pi {
            if pi.len() != self.k {
                return Err(Error::Config("pi length must equal K".into()));
            }
        }
        if self.resolved_seeds()?.is_empty() {
            return Err(Error::Config("empty seed list".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep values must be nonempty".into()));
            }
        }
        Ok(())
    }

    pub fn resolved_seeds(&self) -> Result<Vec<u64>> {
        match (&self.seeds, self.seed_count) {
            (Some(list), _) => Ok(list.clone()),
            (None, Some(count)) => Ok((0..count as u64).collect()),
            (None, None) => Ok(vec![0]),
        }
    }

    pub fn pi_vec(&self) -> Vec<f64> {
        self.pi
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.k as f64; self.k])
    }

    /// Apply a `key=value` override from the command line.
    pub fn set_override(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("bad value for {key}: {e}"));
        match key {
            "n" => self.n = value.parse().map_err(|e| bad(&e))?,
            "m" => self.m = value.parse().map_err(|e| bad(&e))?,
            "r" => self.r = value.parse().map_err(|e| bad(&e))?,
            "k" => self.k = value.parse().map_err(|e| bad(&e))?,
            "p" => self.p = value.parse().map_err(|e| bad(&e))?,
            "q" => self.q = value.parse().map_err(|e| bad(&e))?,
            "rho_n" => self.rho_n = value.parse().map_err(|e| bad(&e))?,
            "omega" => self.omega = value.parse().map_err(|e| bad(&e))?,
            "a_fine" => self.a_fine = value.parse().map_err(|e| bad(&e))?,
            "a_coarse" => self.a_coarse = value.parse().map_err(|e| bad(&e))?,
            "delta_prob" => self.delta_prob = value.parse().map_err(|e| bad(&e))?,
            "master_seed" => self.master_seed = value.parse().map_err(|e| bad(&e))?,
            "seed_count" => self.seed_count = Some(value.parse().map_err(|e| bad(&e))?),
            "perfect_sync" => self.perfect_sync = value.parse().map_err(|e| bad(&e))?,
            _ => return Err(Error::Config(format!("unknown config key: {key}"))),
        }
        Ok(())
    }

    fn sync_mode(&self) -> Result<SyncMode> {
        if self.perfect_sync {
            Ok(SyncMode::PerfectSync)
        } else {
            Ok(SyncMode::Overlap(OverlapParams::new(self.omega)?))
        }
    }
}

/// RNG stream roles within one trial.
pub const STREAM_GRAPH: u64 = 0;
pub const STREAM_COARSENING: u64 = 1;
pub const STREAM_BASELINE: u64 = 2;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable, documented sub-stream derivation: three rounds of the splitmix64
/// finalizer over (master, trial, stream).
pub fn derive_stream_seed(master: u64, trial: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ trial) ^ stream)
}

pub fn stream_rng(master: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_stream_seed(master, trial, stream))
}

/// One trial's metric row.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub delta_prom: f64,
    pub delta_learned: f64,
    pub baseline_error: f64,
    pub alpha_n: f64,
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    pub sync_bias: f64,
    pub balancedness_gap: f64,
    pub e_phi_norm: f64,
    pub e_p_max: f64,
    pub e_d_max: f64,
    pub wall_ms_total: u128,
}

impl TrialRecord {
    pub fn csv_row(&self, sweep_var: &str, sweep_value: &str) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sweep_var,
            sweep_value,
            self.seed,
            self.delta_prom,
            self.delta_learned,
            self.baseline_error,
            self.alpha_n,
            self.epsilon,
            self.epsilon_tilde,
            self.sync_bias,
            self.balancedness_gap,
            self.e_phi_norm,
            self.e_p_max,
            self.e_d_max,
            self.wall_ms_total
        )
    }
}

/// Trial output including the raw community estimate, for optional dumping.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub record: TrialRecord,
    pub phi_hat: Array2<f64>,
    pub p_hat: Array2<f64>,
}

/// Run one seeded trial: sample the instance, compute both estimates and all
/// metrics. Deterministic given (config, seed).
pub fn run_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialOutput> {
    let start = Instant::now();
    let pi = cfg.pi_vec();
    let model = sbm::BlockModel::assortative(cfg.k, cfg.p, cfg.q, cfg.rho_n)?;
    let model = sbm::BlockModel::new(pi.clone(), cfg.rho_n, model.p_circ)?;
    let assign = sbm::generate_membership(cfg.n, &pi)?;

    let mut graph_rng = stream_rng(cfg.master_seed, seed, STREAM_GRAPH);
    let g = sbm::sample_fine_graph(&model, &assign, &mut graph_rng)?;

    let mut coarse_rng = stream_rng(cfg.master_seed, seed, STREAM_COARSENING);
    let map = coarsening::sample_coarsening(&assign, cfg.m, cfg.r, cfg.sync_mode()?, &mut coarse_rng)?;
    let gt = coarsening::coarse_adjacency(&map, &g)?;
    let phi = coarsening::coarse_membership(&map, &assign)?;

    // One dense eigendecomposition of the fine system serves both the group
    // vector and the Gramian-deviation diagnostic.
    let dyn_fine = controllability::normalize(&g.a, cfg.a_fine)?;
    let fine = controllability::theta_fine(&dyn_fine)?;
    let theta_group = controllability::theta_group_from_fine(&fine, &map)?;

    let theta_coarse = estimators::prom_estimate(&gt, cfg.a_coarse)?;
    let mm = estimators::mm_community_estimate(&gt, cfg.k, cfg.prune_quantile)?;
    let learned = estimators::learned_theta(&mm, cfg.a_fine, cfg.n)?;

    let mut baseline_rng = stream_rng(cfg.master_seed, seed, STREAM_BASELINE);
    let baseline = estimators::baseline_vector(cfg.m, &mut baseline_rng);

    let delta_prom = metrics::delta_prom(&theta_group, &theta_coarse, cfg.r)?;
    let delta_learned = metrics::delta_learned(&learned.theta_hat, &theta_group, cfg.r)?;
    let baseline_error = metrics::delta_learned(&baseline, &theta_group, cfg.r)?;
    let alpha_n = metrics::alpha_from_fine(&fine, &model, &assign, cfg.a_fine)?;
    let t1 = metrics::thm1_diagnostics(&model, &assign, &map, cfg.a_fine, cfg.delta_prob)?;
    let d = sbm::relative_size_matrix(&assign);
    let t2 = metrics::thm2_diagnostics(&mm.phi_hat, &mm.p_hat, &learned.d_hat, &phi.phi, &model.p, &d)?;

    let record = TrialRecord {
        seed,
        delta_prom,
        delta_learned,
        baseline_error,
        alpha_n,
        epsilon: t1.epsilon,
        epsilon_tilde: t1.epsilon_tilde,
        sync_bias: t1.sync_bias,
        balancedness_gap: t1.balancedness_gap,
        e_phi_norm: t2.e_phi_norm,
        e_p_max: t2.e_p_max,
        e_d_max: t2.e_d_max,
        wall_ms_total: start.elapsed().as_millis(),
    };
    Ok(TrialOutput {
        record,
        phi_hat: mm.phi_hat,
        p_hat: mm.p_hat,
    })
}

/// Aggregated statistics for one sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub sweep_var: String,
    pub sweep_value: String,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub mean_delta_prom: f64,
    pub std_delta_prom: f64,
    pub mean_delta_learned: f64,
    pub std_delta_learned: f64,
    pub mean_baseline_error: f64,
    pub std_baseline_error: f64,
}

impl AggregateRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.sweep_var,
            self.sweep_value,
            self.trials_ok,
            self.trials_failed,
            self.mean_delta_prom,
            self.std_delta_prom,
            self.mean_delta_learned,
            self.std_delta_learned,
            self.mean_baseline_error,
            self.std_baseline_error
        )
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Result of running a sweep (or a degenerate single-point sweep).
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub trial_rows: Vec<String>,
    pub aggregate: Vec<AggregateRow>,
    pub failures: Vec<String>,
}

impl SweepResult {
    pub fn trials_csv(&self) -> String {
        let mut out = String::from(TRIAL_CSV_HEADER);
        out.push('\n');
        for row in &self.trial_rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from(AGGREGATE_CSV_HEADER);
        out.push('\n');
        for row in &self.aggregate {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }
}

fn apply_sweep_value(cfg: &ExperimentConfig, var: SweepVariable, value: f64) -> Result<ExperimentConfig> {
    let mut point = cfg.clone();
    match var {
        SweepVariable::M => {
            if value <= 0.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!("sweep value for m must be a positive integer (got {value})")));
            }
            point.m = value as usize;
        }
        SweepVariable::RhoN => point.rho_n = value,
        SweepVariable::Omega => point.omega = value,
    }
    point.validate()?;
    Ok(point)
}

fn format_sweep_value(var: SweepVariable, value: f64) -> String {
    match var {
        SweepVariable::M => format!("{}", value as usize),
        _ => format!("{value}"),
    }
}

/// Run every (sweep value, seed) combination, possibly in parallel, and
/// aggregate deterministically in (value, seed) order. Without a sweep
/// section this degenerates to a single point labeled `none`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let seeds = cfg.resolved_seeds()?;
    let points: Vec<(String, String, ExperimentConfig)> = match &cfg.sweep {
        Some(spec) => spec
            .values
            .iter()
            .map(|&v| {
                apply_sweep_value(cfg, spec.variable, v).map(|point| {
                    (
                        spec.variable.name().to_string(),
                        format_sweep_value(spec.variable, v),
                        point,
                    )
                })
            })
            .collect::<Result<_>>()?,
        None => vec![("none".to_string(), "0".to_string(), cfg.clone())],
    };

    let jobs: Vec<(usize, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(pi, _)| seeds.iter().map(move |&s| (pi, s)))
        .collect();
    let mut outcomes: Vec<(usize, u64, std::result::Result<TrialRecord, String>)> = jobs
        .par_iter()
        .map(|&(pi, seed)| {
            let res = run_trial(&points[pi].2, seed)
                .map(|o| o.record)
                .map_err(|e| e.to_string());
            (pi, seed, res)
        })
        .collect();
    outcomes.sort_by_key(|&(pi, seed, _)| (pi, seed));

    let mut trial_rows = Vec::new();
    let mut failures = Vec::new();
    let mut aggregate = Vec::new();
    for (pi, (var, value, _)) in points.iter().enumerate() {
        let mut prom = Vec::new();
        let mut learned = Vec::new();
        let mut base = Vec::new();
        let mut failed = 0usize;
        for (_, seed, res) in outcomes.iter().filter(|&&(p, _, _)| p == pi) {
            match res {
                Ok(rec) => {
                    trial_rows.push(rec.csv_row(var, value));
                    prom.push(rec.delta_prom);
                    learned.push(rec.delta_learned);
                    base.push(rec.baseline_error);
                }
                Err(msg) => {
                    failed += 1;
                    failures.push(format!("{var}={value} seed={seed}: {msg}"));
                }
            }
        }
        let (mp, sp) = mean_std(&prom);
        let (ml, sl) = mean_std(&learned);
        let (mb, sb) = mean_std(&base);
        aggregate.push(AggregateRow {
            sweep_var: var.clone(),
            sweep_value: value.clone(),
            trials_ok: prom.len(),
            trials_failed: failed,
            mean_delta_prom: mp,
            std_delta_prom: sp,
            mean_delta_learned: ml,
            std_delta_learned: sl,
            mean_baseline_error: mb,
            std_baseline_error: sb,
        });
    }
    Ok(SweepResult {
        trial_rows,
        aggregate,
        failures,
    })
}

/// Write sweep artifacts (`trials.csv`, `aggregate.csv`, `manifest.json`)
/// into `out_dir`.
pub fn write_sweep_artifacts(
    cfg: &ExperimentConfig,
    result: &SweepResult,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("trials.csv"), result.trials_csv())?;
    std::fs::write(out_dir.join("aggregate.csv"), result.aggregate_csv())?;
    let manifest = serde_json::json!({
        "config": cfg,
        "trials_ok": result.trial_rows.len(),
        "failures": result.failures,
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    Ok(())
}

/// Write single-trial artifacts (`trial.csv`, `manifest.json`, optionally the
/// estimated matrices) into `out_dir`.
pub fn write_trial_artifacts(
    cfg: &ExperimentConfig,
    output: &TrialOutput,
    out_dir: &Path,
    dump_estimates: bool,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut csv = String::from(TRIAL_CSV_HEADER);
    csv.push('\n');
    csv.push_str(&output.record.csv_row("none", "0"));
    csv.push('\n');
    std::fs::write(out_dir.join("trial.csv"), csv)?;
    let manifest = serde_json::json!({
        "config": cfg,
        "seed": output.record.seed,
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    if dump_estimates {
        std::fs::write(out_dir.join("phi_hat.csv"), matrix_csv(&output.phi_hat))?;
        std::fs::write(out_dir.join("p_hat.csv"), matrix_csv(&output.p_hat))?;
    }
    Ok(())
}

pub fn matrix_csv(mat: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in mat.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Install a global rayon pool honoring `COARSECTRL_THREADS`. Safe to call
/// more than once; later calls are no-ops.
pub fn init_thread_pool() {
    if let Ok(val) = std::env::var("COARSECTRL_THREADS") {
        if let Ok(threads) = val.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

/// Strip the trailing wall-time column from every line of a trial CSV, for
/// content comparisons that ignore timing.
pub fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|line| match line.rfind(',') {
            Some(idx) => &line[..idx],
            None => line,
        })
        .collect::<Vec<_>>()
        .join("\n")
}
