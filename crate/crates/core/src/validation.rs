//! End-to-end checks of the generator against the theory.
//!
//! Each criterion produces one or more [`CheckRow`]s holding the measured
//! deviation, the tolerance it is held to and the verdict. Criteria 1, 2, 6
//! and 8 are deterministic; 3, 4, 5 and 7 are statistical and draw their
//! randomness from substreams of one master seed, so a fixed seed yields an
//! identical report.
//!
//! Quick mode runs the statistical criteria with fewer sequences and widens
//! every tolerance that is not already expressed in standard errors by
//! `sqrt(N_full / N_quick)`, the growth of the sampling spread.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{acf_empirical, acf_statistics, integrate_trajectories, loglog_slope, msd_statistics};
use crate::generator::{generate, synthesis_operator, SeedPolicy};
use crate::model::{acf_theoretical, msd_theoretical, AcfMode, MlParams};
use crate::special::{mittag_leffler, MlEvalConfig};
use crate::spectral::{plan, DEFAULT_LADDER_CAP};

/// Master seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Sequence count of the statistical criteria at full scale.
pub const FULL_N: usize = 1000;
/// Sequence count in quick mode.
pub const QUICK_N: usize = 200;

const REFERENCE_CSV: &str = include_str!("../data/reference.csv");

/// One row of the precomputed high-precision reference table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    /// `ml`, `gamma`, `erfc` or `msd`.
    pub kind: String,
    pub lambda: f64,
    /// τ for `msd` rows, otherwise unused.
    pub param: f64,
    pub x: f64,
    pub value: f64,
}

/// Parses the bundled reference table.
pub fn reference_table() -> Vec<ReferenceRow> {
    REFERENCE_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let num = |i: usize| f[i].parse::<f64>().expect("reference table is well formed");
            ReferenceRow {
                kind: f[0].to_string(),
                lambda: num(1),
                param: num(2),
                x: num(3),
                value: num(4),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    pub seed: u64,
    pub quick: bool,
    /// Multiplies every tolerance; 1 in normal use. Lets tests force failures.
    pub tolerance_scale: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            quick: false,
            tolerance_scale: 1.0,
        }
    }
}

impl ValidationConfig {
    pub fn n(&self) -> usize {
        if self.quick {
            QUICK_N
        } else {
            FULL_N
        }
    }

    /// Widening applied to sample-size dependent tolerances.
    pub fn widening(&self) -> f64 {
        (FULL_N as f64 / self.n() as f64).sqrt()
    }

    fn seed_for(&self, criterion: u64, set: u64) -> u64 {
        SeedPolicy::fixed(self.seed).substream_seed(criterion * 1000 + set)
    }
}

/// How a row is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// No data point fell under the criterion; recorded as a pass.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub criterion: u8,
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CheckRow {
    fn upper(criterion: u8, label: String, measured: f64, tolerance: f64) -> Self {
        let verdict = if measured <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            criterion,
            label,
            measured,
            tolerance,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(CheckRow::passed)
    }

    pub fn failures(&self) -> Vec<&CheckRow> {
        self.rows.iter().filter(|r| !r.passed()).collect()
    }

    pub fn criterion(&self, k: u8) -> Vec<&CheckRow> {
        self.rows.iter().filter(|r| r.criterion == k).collect()
    }

    /// Fixed-width table; contains no timings so it is reproducible.
    #[allow(clippy::write_literal)]
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<3} {:<66} {:>12} {:>12}  {}",
            "#", "check", "measured", "tolerance", "result"
        );
        for r in &self.rows {
            let verdict = match r.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Vacuous => "PASS (vacuous)",
            };
            let _ = writeln!(
                out,
                "{:<3} {:<66} {:>12.4e} {:>12.4e}  {}",
                r.criterion, r.label, r.measured, r.tolerance, verdict
            );
        }
        let failed = self.failures().len();
        let _ = writeln!(out, "{} checks, {} failed", self.rows.len(), failed);
        out
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Criterion 1: `L Lᵀ` reproduces the Toeplitz covariance.
pub fn covariance_exactness(cfg: &ValidationConfig) -> Result<Vec<CheckRow>> {
    let tol = 1e-10 * cfg.tolerance_scale;
    let mut rows = Vec::new();
    for lambda in [0.6, 1.2, 1.8] {
        for tau in [5.0, 20.0] {
            let params = MlParams::new(1.0, lambda, tau)?;
            let spec = plan(&params, 16, DEFAULT_LADDER_CAP)?;
            let op = synthesis_operator(&spec)?;
            let gram = op.gram();
            let r = op.rows;
            let cov = params.autocovariance(r)?;
            let worst = (0..r * r)
                .into_par_iter()
                .map(|idx| (gram[idx] - cov[(idx / r).abs_diff(idx % r)]).abs())
                .reduce(|| 0.0, f64::max);
            rows.push(CheckRow::upper(
                1,
                format!("max|LL'-Toeplitz| lambda={lambda} tau={tau} T_opt={r}"),
                worst,
                tol,
            ));
        }
    }
    Ok(rows)
}

/// Criterion 2: Mittag-Leffler accuracy against the high-precision table.
pub fn mittag_leffler_accuracy(cfg: &ValidationConfig) -> Result<Vec<CheckRow>> {
    let ml_cfg = MlEvalConfig::default();
    let table = reference_table();
    let grid: Vec<&ReferenceRow> = table.iter().filter(|r| r.kind == "ml").collect();
    let mut worst = 0.0f64;
    for row in &grid {
        let v = mittag_leffler(row.lambda, -row.x, &ml_cfg)?;
        worst = worst.max(rel(v, row.value));
    }
    let mut exp_worst = 0.0f64;
    for i in 0..=300 {
        let x = i as f64 * 0.1;
        exp_worst = exp_worst.max(rel(mittag_leffler(1.0, -x, &ml_cfg)?, (-x).exp()));
    }
    let mut erfc_worst = 0.0f64;
    for row in table.iter().filter(|r| r.kind == "erfc") {
        erfc_worst = erfc_worst.max(rel(mittag_leffler(0.5, -row.x, &ml_cfg)?, row.value));
    }
    let s = cfg.tolerance_scale;
    Ok(vec![
        CheckRow::upper(
            2,
            format!("E_lambda vs reference, {} grid points", grid.len()),
            worst,
            1e-8 * s,
        ),
        CheckRow::upper(2, "E_1(-x) vs exp(-x), x in [0,30]".into(), exp_worst, 1e-10 * s),
        CheckRow::upper(2, "E_1/2(-x) vs exp(x^2) erfc(x)".into(), erfc_worst, 1e-10 * s),
    ])
}

/// Statistics of one criterion-3 parameter set, kept for criteria 4 and 7.
struct AcfRun {
    lambda: f64,
    tau: f64,
    max_z: f64,
    rms: f64,
    c0_rel: f64,
    /// `(|Ĉ| - |C|) / SE` maximized over lags with `|C| < 0.01 C(0)`, if any.
    near_zero_z: Option<f64>,
    near_zero_lags: usize,
}

const ACF_T: usize = 500;
const ACF_TMAX_CAP: usize = 400;

fn acf_run(cfg: &ValidationConfig, set: u64, lambda: f64, tau: f64) -> Result<AcfRun> {
    let params = MlParams::new(1.0, lambda, tau)?;
    let spec = plan(&params, ACF_T, DEFAULT_LADDER_CAP)?;
    let batch = generate(&spec, cfg.n(), ACF_T, Some(cfg.seed_for(3, set)))?;
    let tmax = ACF_T - 1;
    let est = acf_statistics(&batch, tmax, 1, rayon::current_num_threads(), AcfMode::TimeAveraged)?;
    let theory = acf_theoretical(&params, tmax, 1)?;
    let c0 = theory.values[0];

    let fit_max = ((5.0 * tau) as usize).min(ACF_TMAX_CAP);
    let mut max_z = 0.0f64;
    let mut sq = 0.0;
    for lag in 0..=fit_max {
        let rho = theory.values[lag] / c0;
        if lag > 0 {
            max_z = max_z.max((est.normalized[lag] - rho).abs() / est.normalized_se[lag]);
        }
        let d = (est.series.values[lag] - theory.values[lag]) / c0;
        sq += d * d;
    }
    let rms = (sq / (fit_max + 1) as f64).sqrt();

    let mut near_zero_z: Option<f64> = None;
    let mut near_zero_lags = 0;
    for lag in 1..=tmax {
        let c = theory.values[lag];
        if c.abs() < 0.01 * c0 {
            near_zero_lags += 1;
            let z = (est.series.values[lag].abs() - c.abs()) / est.std_error[lag];
            near_zero_z = Some(near_zero_z.map_or(z, |w| w.max(z)));
        }
    }
    Ok(AcfRun {
        lambda,
        tau,
        max_z,
        rms,
        c0_rel: rel(est.series.values[0], params.variance()),
        near_zero_z,
        near_zero_lags,
    })
}

fn acf_runs(cfg: &ValidationConfig, sets: &[(f64, f64)]) -> Result<Vec<AcfRun>> {
    // seeds follow the position in ACF_SETS so every entry point
    // sees the same batches
    sets.iter()
        .map(|&(lambda, tau)| {
            let set = ACF_SETS
                .iter()
                .position(|&s| s == (lambda, tau))
                .expect("criterion-7 sets are criterion-3 sets");
            acf_run(cfg, set as u64, lambda, tau)
        })
        .collect()
}

const ACF_SETS: [(f64, f64); 6] = [
    (0.6, 20.0),
    (0.6, 100.0),
    (1.2, 20.0),
    (1.2, 100.0),
    (1.8, 20.0),
    (1.8, 100.0),
];

fn acf_rows(cfg: &ValidationConfig, runs: &[AcfRun]) -> Vec<CheckRow> {
    let s = cfg.tolerance_scale;
    let mut rows = Vec::new();
    for r in runs {
        rows.push(CheckRow::upper(
            3,
            format!("max |r-rho|/SE, t<=min(5tau,400), lambda={} tau={}", r.lambda, r.tau),
            r.max_z,
            3.0 * s,
        ));
        rows.push(CheckRow::upper(
            3,
            format!("RMS (C_hat-C)/C(0), lambda={} tau={}", r.lambda, r.tau),
            r.rms,
            0.05 * cfg.widening() * s,
        ));
    }
    rows
}

fn variance_rows(cfg: &ValidationConfig, runs: &[AcfRun]) -> Vec<CheckRow> {
    runs.iter()
        .map(|r| {
            CheckRow::upper(
                4,
                format!("|C_hat(0)/c0 - 1|, lambda={} tau={}", r.lambda, r.tau),
                r.c0_rel,
                0.05 * cfg.widening() * cfg.tolerance_scale,
            )
        })
        .collect()
}

fn near_zero_rows(cfg: &ValidationConfig, runs: &[AcfRun]) -> Vec<CheckRow> {
    let tol = 3.0 * cfg.tolerance_scale;
    runs.iter()
        .map(|r| {
            let label = format!(
                "near-zero envelope (|C_hat|-|C|)/SE, lambda={} tau={} ({} lags)",
                r.lambda, r.tau, r.near_zero_lags
            );
            match r.near_zero_z {
                Some(z) => CheckRow::upper(7, label, z, tol),
                None => CheckRow {
                    criterion: 7,
                    label,
                    measured: 0.0,
                    tolerance: tol,
                    verdict: Verdict::Vacuous,
                },
            }
        })
        .collect()
}

/// Criteria 3 and 4: ACF shape over the parameter grid and lag-0 variance.
pub fn acf_reproduction(cfg: &ValidationConfig) -> Result<(Vec<CheckRow>, Vec<CheckRow>)> {
    let runs = acf_runs(cfg, &ACF_SETS)?;
    Ok((acf_rows(cfg, &runs), variance_rows(cfg, &runs)))
}

/// Criterion 5: MSD slope and magnitude.
pub fn msd_reproduction(cfg: &ValidationConfig) -> Result<Vec<CheckRow>> {
    const T: usize = 2000;
    let s = cfg.tolerance_scale;
    let mut rows = Vec::new();
    for (set, &(lambda, tau)) in ACF_SETS.iter().enumerate() {
        let params = MlParams::new(1.0, lambda, tau)?;
        let spec = plan(&params, T, DEFAULT_LADDER_CAP)?;
        let batch = generate(&spec, cfg.n(), T, Some(cfg.seed_for(5, set as u64)))?;
        let traj = integrate_trajectories(&batch);
        drop(batch);
        let est = msd_statistics(&traj, T, 1)?;
        let slope = loglog_slope(&est.series, 10.0 * tau, T as f64)?;
        rows.push(CheckRow::upper(
            5,
            format!("|slope - (2-lambda)| on [10tau,T], lambda={lambda} tau={tau}"),
            (slope - (2.0 - lambda)).abs(),
            0.15 * cfg.widening() * s,
        ));
        let t1 = tau as usize;
        let theory = msd_theoretical(&params, 10 * t1, t1)?;
        let worst = [t1, 5 * t1, 10 * t1]
            .iter()
            .map(|&t| rel(est.series.value_at(t).unwrap(), theory.value_at(t).unwrap()))
            .fold(0.0, f64::max);
        rows.push(CheckRow::upper(
            5,
            format!("max rel MSD error at tau,5tau,10tau, lambda={lambda} tau={tau}"),
            worst,
            0.10 * cfg.widening() * s,
        ));
    }
    Ok(rows)
}

/// Criterion 6: exponential special case.
pub fn exponential_case(cfg: &ValidationConfig) -> Result<Vec<CheckRow>> {
    let params = MlParams::new(1.0, 1.0, 10.0)?;
    let acf = acf_theoretical(&params, 200, 1)?;
    let acf_worst = acf
        .lags
        .iter()
        .zip(&acf.values)
        .map(|(&t, &v)| rel(v, 0.1 * (-(t as f64) / 10.0).exp()))
        .fold(0.0, f64::max);
    let msd = msd_theoretical(&params, 20, 10)?;
    let msd_err = rel(msd.value_at(10).unwrap(), 20.0 * (-1.0f64).exp());
    let s = cfg.tolerance_scale;
    Ok(vec![
        CheckRow::upper(6, "ACF vs 0.1 exp(-t/10), t in [0,200]".into(), acf_worst, 1e-10 * s),
        CheckRow::upper(6, "MSD(10) vs 20/e".into(), msd_err, 1e-6 * s),
    ])
}

/// Criterion 7: bounded oscillation where the law is near zero.
///
/// The primary set (λ = 0.6, τ = 100, T = 500) has no lag below `0.01 C(0)`
/// inside the window, so its row is vacuous; the oscillating λ > 1 sets at
/// τ = 20 supply the non-trivial checks.
pub fn near_zero_oscillation(cfg: &ValidationConfig) -> Result<Vec<CheckRow>> {
    let runs = acf_runs(cfg, &[(0.6, 100.0), (1.2, 20.0), (1.8, 20.0)])?;
    Ok(near_zero_rows(cfg, &runs))
}

/// Criterion 8: determinism and independence from the thread count.
pub fn determinism(cfg: &ValidationConfig) -> Result<Vec<CheckRow>> {
    let params = MlParams::new(1.0, 0.6, 10.0)?;
    let spec = plan(&params, 500, DEFAULT_LADDER_CAP)?;
    let seed = cfg.seed_for(8, 0);
    let in_pool = |threads: usize| -> Result<_> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| generate(&spec, 64, 500, Some(seed)))
    };
    let reference = in_pool(1)?;
    let mut batch_mismatch = 0usize;
    for threads in [1, 4, 8] {
        if in_pool(threads)?.data() != reference.data() {
            batch_mismatch += 1;
        }
    }
    let acf1 = acf_empirical(&reference, 200, 1, 1)?;
    let mut acf_mismatch = 0usize;
    for workers in [4, 8] {
        if acf_empirical(&reference, 200, 1, workers)?.values != acf1.values {
            acf_mismatch += 1;
        }
    }
    let tol = 0.0;
    Ok(vec![
        CheckRow::upper(
            8,
            "batches differing across runs and threads {1,4,8}".into(),
            batch_mismatch as f64,
            tol,
        ),
        CheckRow::upper(
            8,
            "ACF results differing across workers {1,4,8}".into(),
            acf_mismatch as f64,
            tol,
        ),
    ])
}

/// Runs every criterion in order, deterministic ones first.
pub fn run_all(cfg: &ValidationConfig) -> Result<Report> {
    let mut rows = Vec::new();
    rows.extend(covariance_exactness(cfg)?);
    rows.extend(mittag_leffler_accuracy(cfg)?);
    rows.extend(exponential_case(cfg)?);
    rows.extend(determinism(cfg)?);
    let runs = acf_runs(cfg, &ACF_SETS)?;
    rows.extend(acf_rows(cfg, &runs));
    rows.extend(variance_rows(cfg, &runs));
    rows.extend(msd_reproduction(cfg)?);
    // the criterion-7 sets are a subset of the criterion-3 sets; reuse them
    let c7: Vec<AcfRun> = runs
        .into_iter()
        .filter(|r| matches!((r.lambda, r.tau), (l, t) if (l == 0.6 && t == 100.0) || (l > 1.0 && t == 20.0)))
        .collect();
    rows.extend(near_zero_rows(cfg, &c7));
    rows.sort_by_key(|r| r.criterion);
    Ok(Report { rows })
}
