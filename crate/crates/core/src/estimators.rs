//! Empirical autocorrelation, trajectory integration and mean squared
//! displacement of generated batches.
//!
//! All reductions run per sequence first and are then combined sequentially
//! in sequence order, so results are bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::NoiseBatch;
use crate::model::{check_grid, AcfMode, AcfSeries, MlParams, MsdSeries, SeriesKind};

/// Random-walk positions `x_m(0..=T)` driven by a noise batch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    n: usize,
    t_plus_1: usize,
    positions: Vec<f64>,
    source_params: Option<MlParams>,
}

impl TrajectoryBatch {
    /// Wraps externally produced positions; every trajectory must start at 0.
    pub fn from_positions(n: usize, t_plus_1: usize, positions: Vec<f64>) -> Result<Self> {
        if n == 0 || t_plus_1 < 2 || positions.len() != n * t_plus_1 {
            return Err(Error::InvalidArgument(format!(
                "{} positions do not form {n} trajectories of {t_plus_1} points",
                positions.len()
            )));
        }
        if positions.chunks_exact(t_plus_1).any(|row| row[0] != 0.0) {
            return Err(Error::InvalidArgument("trajectories must start at 0".into()));
        }
        Ok(Self {
            n,
            t_plus_1,
            positions,
            source_params: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.t_plus_1
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn trajectory(&self, m: usize) -> &[f64] {
        &self.positions[m * self.t_plus_1..(m + 1) * self.t_plus_1]
    }

    pub fn source_params(&self) -> Option<&MlParams> {
        self.source_params.as_ref()
    }
}

/// Empirical ACF with the per-lag sampling spread across sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfEstimate {
    pub series: AcfSeries,
    /// Standard error of each `Ĉ(t)` from the spread of per-sequence estimates.
    pub std_error: Vec<f64>,
    /// `Ĉ(t) / Ĉ(0)`.
    pub normalized: Vec<f64>,
    /// Delta-method standard error of the normalized ratio.
    pub normalized_se: Vec<f64>,
}

fn run_with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(job))
}

fn acf_lags(batch: &NoiseBatch, tmax: usize, dt: usize) -> Result<Vec<usize>> {
    check_grid(tmax, dt)?;
    if tmax >= batch.t() {
        return Err(Error::InvalidArgument(format!(
            "tmax = {tmax} must be less than the sequence length T = {}",
            batch.t()
        )));
    }
    Ok((0..=tmax).step_by(dt).collect())
}

/// `Σ_s ξ(s) ξ(s+t)` over the origins the mode admits, for each lag.
fn lag_sums(row: &[f64], lags: &[usize], mode: AcfMode) -> Vec<f64> {
    lags.iter()
        .map(|&lag| match mode {
            AcfMode::TimeAveraged => row.iter().zip(&row[lag..]).map(|(a, b)| a * b).sum(),
            AcfMode::OriginOnly => row[0] * row[lag],
        })
        .collect()
}

fn origin_count(t: usize, lag: usize, mode: AcfMode) -> f64 {
    match mode {
        AcfMode::TimeAveraged => (t - lag) as f64,
        AcfMode::OriginOnly => 1.0,
    }
}

/// Per-sequence lag sums, in sequence order.
fn per_sequence(batch: &NoiseBatch, lags: &[usize], mode: AcfMode, workers: usize) -> Result<Vec<Vec<f64>>> {
    run_with_workers(workers, || {
        (0..batch.n())
            .into_par_iter()
            .map(|m| lag_sums(batch.row(m), lags, mode))
            .collect()
    })
}

/// Time- and ensemble-averaged ACF
/// `Ĉ(t) = Σ_m Σ_{s<T-t} ξ_m(s) ξ_m(s+t) / (N (T - t))` on lags `{0, dt, ...} ≤ tmax`.
pub fn acf_empirical(batch: &NoiseBatch, tmax: usize, dt: usize, workers: usize) -> Result<AcfSeries> {
    acf_empirical_with_mode(batch, tmax, dt, workers, AcfMode::TimeAveraged)
}

/// As [`acf_empirical`] with an explicit averaging mode.
pub fn acf_empirical_with_mode(
    batch: &NoiseBatch,
    tmax: usize,
    dt: usize,
    workers: usize,
    mode: AcfMode,
) -> Result<AcfSeries> {
    Ok(acf_statistics(batch, tmax, dt, workers, mode)?.series)
}

/// Empirical ACF together with standard errors of the mean and of the
/// normalized ratio.
pub fn acf_statistics(
    batch: &NoiseBatch,
    tmax: usize,
    dt: usize,
    workers: usize,
    mode: AcfMode,
) -> Result<AcfEstimate> {
    let lags = acf_lags(batch, tmax, dt)?;
    let sums = per_sequence(batch, &lags, mode, workers)?;
    let n = batch.n() as f64;
    let t = batch.t();
    let counts: Vec<f64> = lags.iter().map(|&lag| origin_count(t, lag, mode)).collect();

    let mut total = vec![0.0; lags.len()];
    for row in &sums {
        for (acc, v) in total.iter_mut().zip(row) {
            *acc += v;
        }
    }
    let values: Vec<f64> = total.iter().zip(&counts).map(|(s, c)| s / (n * c)).collect();

    // per-sequence estimates c_m(t) = S_m(t)/count; moments about the mean
    let mut var = vec![0.0; lags.len()];
    let mut cov0 = vec![0.0; lags.len()];
    for row in &sums {
        let d0 = row[0] / counts[0] - values[0];
        for (i, s) in row.iter().enumerate() {
            let d = s / counts[i] - values[i];
            var[i] += d * d;
            cov0[i] += d * d0;
        }
    }
    let denom = if batch.n() > 1 { n * (n - 1.0) } else { f64::NAN };
    let std_error: Vec<f64> = var.iter().map(|v| (v / denom).sqrt()).collect();

    let c0 = values[0];
    let var0 = var[0] / denom;
    let normalized: Vec<f64> = values.iter().map(|v| v / c0).collect();
    let normalized_se = normalized
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let vt = var[i] / denom;
            let ct0 = cov0[i] / denom;
            ((vt - 2.0 * r * ct0 + r * r * var0).max(0.0)).sqrt() / c0.abs()
        })
        .collect();

    Ok(AcfEstimate {
        series: AcfSeries {
            lags,
            values,
            kind: SeriesKind::Empirical,
            estimator: Some(mode),
        },
        std_error,
        normalized,
        normalized_se,
    })
}

/// Unit-step Euler integration `x(0) = 0`, `x(t+1) = x(t) + ξ(t)`.
pub fn integrate_trajectories(batch: &NoiseBatch) -> TrajectoryBatch {
    let t_plus_1 = batch.t() + 1;
    let mut positions = vec![0.0; batch.n() * t_plus_1];
    positions
        .par_chunks_mut(t_plus_1)
        .zip(batch.data().par_chunks(batch.t()))
        .for_each(|(x, xi)| {
            for (s, v) in xi.iter().enumerate() {
                x[s + 1] = x[s] + v;
            }
        });
    TrajectoryBatch {
        n: batch.n(),
        t_plus_1,
        positions,
        source_params: batch.params().copied(),
    }
}

/// Ensemble MSD with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MsdEstimate {
    pub series: MsdSeries,
    pub std_error: Vec<f64>,
}

/// `MSD(t) = (1/N) Σ_m (x_m(t) - x_m(0))²` on times `{dt, 2dt, ...} ≤ tmax`.
pub fn msd_empirical(traj: &TrajectoryBatch, tmax: usize, dt: usize) -> Result<MsdSeries> {
    Ok(msd_statistics(traj, tmax, dt)?.series)
}

pub fn msd_statistics(traj: &TrajectoryBatch, tmax: usize, dt: usize) -> Result<MsdEstimate> {
    check_grid(tmax, dt)?;
    if tmax > traj.points() - 1 {
        return Err(Error::InvalidArgument(format!(
            "tmax = {tmax} exceeds the trajectory length {}",
            traj.points() - 1
        )));
    }
    let times: Vec<usize> = (dt..=tmax).step_by(dt).collect();
    let n = traj.n() as f64;
    let (values, std_error): (Vec<f64>, Vec<f64>) = times
        .par_iter()
        .map(|&t| {
            let sq = (0..traj.n()).map(|m| {
                let x = traj.trajectory(m);
                let d = x[t] - x[0];
                d * d
            });
            let mean = sq.clone().sum::<f64>() / n;
            let ss: f64 = sq.map(|v| (v - mean) * (v - mean)).sum();
            let se = if traj.n() > 1 {
                (ss / (n * (n - 1.0))).sqrt()
            } else {
                f64::NAN
            };
            (mean, se)
        })
        .unzip();
    Ok(MsdEstimate {
        series: MsdSeries {
            times,
            values,
            kind: SeriesKind::Empirical,
        },
        std_error,
    })
}

/// Least-squares slope of `ln MSD` against `ln t` over `t_lo ≤ t ≤ t_hi`.
pub fn loglog_slope(series: &MsdSeries, t_lo: f64, t_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(&t, _)| t as f64 >= t_lo && t as f64 <= t_hi)
        .map(|(&t, &v)| (t as f64, v))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs at least 3 points in [{t_lo}, {t_hi}], found {}",
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(t, v)| *t <= 0.0 || v.is_nan() || *v <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log-log fit needs positive values, got MSD({t}) = {v}"
        )));
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| (a + t.ln(), b + v.ln()));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| {
        let dx = t.ln() - mx;
        (a + dx * (v.ln() - my), b + dx * dx)
    });
    Ok(sxy / sxx)
}
