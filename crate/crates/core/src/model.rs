//! The Mittag-Leffler noise law: parameters, theoretical autocorrelation
//! `C(t) = (C/τ^λ) E_λ(-(t/τ)^λ)` and the free-particle MSD
//! `MSD(t) = 2 ∫_0^t (t - s) C(s) ds`.
//!
//! Time is measured in steps of the generated sequence; τ is in steps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::{mittag_leffler, MlEvalConfig};

pub const TAU_MAX: f64 = 10_000.0;

/// Parameters of the noise law.
///
/// `c` carries units of variance × time^λ so that `c / τ^λ` is the lag-0
/// variance of the noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    c: f64,
    lambda: f64,
    tau: f64,
}

impl MlParams {
    pub fn new(c: f64, lambda: f64, tau: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 2.0) {
            return Err(Error::domain("lambda", lambda, "the open interval (0,2)"));
        }
        if !(tau > 0.0 && tau <= TAU_MAX) {
            return Err(Error::domain("tau", tau, "the interval (0,10000]"));
        }
        if c.is_nan() || c <= 0.0 || c.is_infinite() {
            return Err(Error::domain("C", c, "(0, inf)"));
        }
        Ok(Self { c, lambda, tau })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Lag-0 variance `C / τ^λ`.
    pub fn variance(&self) -> f64 {
        self.c / self.tau.powf(self.lambda)
    }

    /// `C(t)` at a single (possibly fractional) lag `t ≥ 0`.
    pub fn acf_at(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::domain("t", t, "[0, inf)"));
        }
        let c0 = self.variance();
        if t == 0.0 {
            return Ok(c0);
        }
        let z = -(t / self.tau).powf(self.lambda);
        Ok(c0 * mittag_leffler(self.lambda, z, &MlEvalConfig::default())?)
    }

    /// `[C(0), C(1), ..., C(max_lag)]` at unit spacing.
    pub fn autocovariance(&self, max_lag: usize) -> Result<Vec<f64>> {
        (0..=max_lag).into_par_iter().map(|k| self.acf_at(k as f64)).collect()
    }
}

/// Whether a series came from the closed-form law or from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Theoretical,
    Empirical,
}

/// How an empirical autocorrelation was averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AcfMode {
    /// Average over every time origin and over the ensemble.
    #[default]
    TimeAveraged,
    /// Ensemble average of `ξ(0)ξ(t)` only.
    OriginOnly,
}

impl AcfMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AcfMode::TimeAveraged => "time-averaged",
            AcfMode::OriginOnly => "origin-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcfSeries {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub kind: SeriesKind,
    /// Estimator used for empirical series; `None` for theoretical ones.
    pub estimator: Option<AcfMode>,
}

impl AcfSeries {
    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn value_at(&self, lag: usize) -> Option<f64> {
        self.lags.binary_search(&lag).ok().map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsdSeries {
    pub times: Vec<usize>,
    pub values: Vec<f64>,
    pub kind: SeriesKind,
}

impl MsdSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value_at(&self, time: usize) -> Option<f64> {
        self.times.binary_search(&time).ok().map(|i| self.values[i])
    }
}

pub(crate) fn check_grid(tmax: usize, dt: usize) -> Result<()> {
    if dt < 1 || dt >= tmax {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} must lie in [1, tmax) with tmax = {tmax}"
        )));
    }
    Ok(())
}

/// Theoretical ACF on lags `{0, dt, 2dt, ...} ≤ tmax`.
pub fn acf_theoretical(params: &MlParams, tmax: usize, dt: usize) -> Result<AcfSeries> {
    check_grid(tmax, dt)?;
    let lags: Vec<usize> = (0..=tmax).step_by(dt).collect();
    let values = lags
        .par_iter()
        .map(|&k| params.acf_at(k as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(AcfSeries {
        lags,
        values,
        kind: SeriesKind::Theoretical,
        estimator: None,
    })
}

/// Agreement required between successive step halvings.
pub const MSD_REL_TOL: f64 = 1e-6;
const MSD_MAX_HALVINGS: u32 = 10;

/// Theoretical MSD on times `{dt, 2dt, ...} ≤ tmax`.
///
/// Uses `MSD(t) = 2 (t ∫₀ᵗ C − ∫₀ᵗ s C)`. The first unit interval, where `C`
/// has its `s^λ` cusp, is integrated adaptively to near machine precision;
/// the rest uses cumulative composite Simpson on a step no larger than
/// `min(1/2, max(τ, 1)/100)`, halved until every output value agrees with the
/// previous level to [`MSD_REL_TOL`].
pub fn msd_theoretical(params: &MlParams, tmax: usize, dt: usize) -> Result<MsdSeries> {
    check_grid(tmax, dt)?;
    let times: Vec<usize> = (dt..=tmax).step_by(dt).collect();
    // past s = 1 the law varies on the scale max(s, τ); the head takes the cusp
    let mut per_unit = (50.0 / params.tau().max(1.0)).ceil() as usize;
    let head = msd_head(params)?;
    let mut coarse = msd_integer_grid(params, tmax, per_unit, head)?;
    for _ in 0..MSD_MAX_HALVINGS {
        per_unit *= 2;
        let fine = msd_integer_grid(params, tmax, per_unit, head)?;
        let worst = times
            .iter()
            .map(|&t| {
                let (a, b) = (coarse[t], fine[t]);
                ((a - b) / b).abs()
            })
            .fold(0.0, f64::max);
        if worst <= MSD_REL_TOL {
            let values = times.iter().map(|&t| fine[t]).collect();
            return Ok(MsdSeries {
                times,
                values,
                kind: SeriesKind::Theoretical,
            });
        }
        coarse = fine;
    }
    Err(Error::Quadrature(format!(
        "MSD did not settle to {MSD_REL_TOL:e} after {MSD_MAX_HALVINGS} halvings"
    )))
}

/// `(∫₀¹ C, ∫₀¹ s C)` by adaptive Gauss-Kronrod.
fn msd_head(params: &MlParams) -> Result<(f64, f64)> {
    let one = |weight: fn(f64) -> f64| {
        let failed = std::cell::Cell::new(false);
        let f = |s: f64| match params.acf_at(s) {
            Ok(c) => weight(s) * c,
            Err(_) => {
                failed.set(true);
                0.0
            }
        };
        // |C| ≤ c0 on the whole axis, so c0 is the natural absolute scale
        // when the oscillating λ > 1 integrands cancel
        let scale = params.variance();
        let done = |v: f64, e: f64| e <= 1e-13 * v.abs().max(scale);
        let r = quadrature::integrate(f, &[0.0, 1.0], done, 2000);
        if failed.get() || !r.converged {
            return Err(Error::Quadrature(format!(
                "head integral on [0, 1] stalled at error {:e}",
                r.error
            )));
        }
        Ok(r.value)
    };
    Ok((one(|_| 1.0)?, one(|s| s)?))
}

/// MSD at every integer time `0..=tmax` with Simpson step `h = 1/(2·per_unit)`.
fn msd_integer_grid(params: &MlParams, tmax: usize, per_unit: usize, head: (f64, f64)) -> Result<Vec<f64>> {
    let panels = 2 * per_unit;
    let h = 1.0 / panels as f64;

    let (head0, head1) = head;
    // body nodes s = 1 + i h
    let nodes = panels * tmax.saturating_sub(1) + 1;
    let body: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|i| params.acf_at(1.0 + i as f64 * h))
        .collect::<Result<_>>()?;

    let mut out = vec![0.0; tmax + 1];
    let (mut i0, mut i1) = (head0, head1);
    out[1] = 2.0 * (i0 - i1);
    for j in 1..tmax {
        let start = (j - 1) * panels;
        let slab: Vec<(f64, f64)> = (0..=panels)
            .map(|q| {
                let c = body[start + q];
                let s = j as f64 + q as f64 * h;
                (c, s * c)
            })
            .collect();
        let (d0, d1) = simpson_pair(&slab, h);
        i0 += d0;
        i1 += d1;
        let t = (j + 1) as f64;
        out[j + 1] = 2.0 * (t * i0 - i1);
    }
    Ok(out)
}

fn simpson_pair(f: &[(f64, f64)], h: f64) -> (f64, f64) {
    let n = f.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let (mut a, mut b) = (f[0].0 + f[n].0, f[0].1 + f[n].1);
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        a += w * v.0;
        b += w * v.1;
    }
    (a * h / 3.0, b * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_enforce_ranges() {
        assert!(MlParams::new(1.0, 0.6, 10.0).is_ok());
        assert!(MlParams::new(1.0, 2.0, 10.0).is_err());
        assert!(MlParams::new(1.0, 0.0, 10.0).is_err());
        assert!(MlParams::new(1.0, 1.0, 10_000.0).is_ok());
        assert!(MlParams::new(1.0, 1.0, 10_000.5).is_err());
        assert!(MlParams::new(1.0, 1.0, 0.0).is_err());
        assert!(MlParams::new(0.0, 1.0, 1.0).is_err());
        assert!(MlParams::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn lambda_error_names_the_range() {
        let msg = MlParams::new(1.0, 2.0, 10.0).unwrap_err().to_string();
        assert!(msg.contains("(0,2)"), "{msg}");
        let msg = MlParams::new(1.0, 1.0, 10_001.0).unwrap_err().to_string();
        assert!(msg.contains("(0,10000]"), "{msg}");
    }

    #[test]
    fn exponential_acf_values() {
        let p = MlParams::new(1.0, 1.0, 10.0).unwrap();
        let s = acf_theoretical(&p, 50, 1).unwrap();
        assert_eq!(s.values[0], 0.1);
        assert!((s.value_at(10).unwrap() - 0.1 * (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(s.lags.len(), 51);
    }

    #[test]
    fn lag_grids_follow_convention() {
        let p = MlParams::new(1.0, 0.6, 10.0).unwrap();
        let a = acf_theoretical(&p, 10, 3).unwrap();
        assert_eq!(a.lags, vec![0, 3, 6, 9]);
        let m = msd_theoretical(&p, 10, 3).unwrap();
        assert_eq!(m.times, vec![3, 6, 9]);
        assert!(acf_theoretical(&p, 10, 10).is_err());
        assert!(acf_theoretical(&p, 10, 0).is_err());
    }

    #[test]
    fn exponential_msd_closed_form() {
        // 2[tτ - τ²(1 - e^{-t/τ})] c0 with c0 = 1/τ; at t = τ = 10 this is 20/e
        let p = MlParams::new(1.0, 1.0, 10.0).unwrap();
        let m = msd_theoretical(&p, 40, 1).unwrap();
        let v = m.value_at(10).unwrap();
        let exact = 20.0 * (-1.0f64).exp();
        assert!(((v - exact) / exact).abs() < 1e-6, "{v} vs {exact}");
        for (&t, &v) in m.times.iter().zip(&m.values) {
            let t = t as f64;
            let e = 2.0 * (t * 10.0 - 100.0 * (1.0 - (-t / 10.0).exp())) / 10.0;
            assert!(((v - e) / e).abs() < 1e-6, "t {t}: {v} vs {e}");
        }
    }

    #[test]
    fn ballistic_onset() {
        // τ ≫ 1: C is nearly flat over one step, so MSD(1) ≈ C(0)
        let p = MlParams::new(1.0, 0.6, 10_000.0).unwrap();
        let m = msd_theoretical(&p, 4, 1).unwrap();
        let c0 = p.variance();
        for (&t, &v) in m.times.iter().zip(&m.values) {
            let ballistic = c0 * (t * t) as f64;
            assert!(v <= ballistic);
            assert!(v / ballistic > 0.99, "t {t}: ratio {}", v / ballistic);
        }
    }
}
