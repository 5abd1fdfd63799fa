//! Circulant embedding of the autocovariance and the search for the smallest
//! power-of-two length whose circulant matrix is non-negative definite.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::model::MlParams;

pub const DEFAULT_LADDER_CAP: usize = 1 << 24;

/// Eigenvalues in `[-CLAMP_REL · max A, 0)` are treated as round-off and set to zero.
pub const CLAMP_REL: f64 = 1e-12;

/// `[c_0, ..., c_T, c_{T-1}, ..., c_1]` from `c_0..=c_T`.
pub fn embed(cov: &[f64]) -> Vec<f64> {
    assert!(cov.len() >= 2, "need at least c_0 and c_1");
    let t = cov.len() - 1;
    let mut out = Vec::with_capacity(2 * t);
    out.extend_from_slice(cov);
    out.extend(cov[1..t].iter().rev());
    out
}

/// The even symmetric extension of length `2T` for the given noise law.
pub fn build_embedding(params: &MlParams, t: usize) -> Result<Vec<f64>> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!(
            "embedding length T = {t} must be at least 2"
        )));
    }
    Ok(embed(&params.autocovariance(t)?))
}

/// Eigenvalues of the circulant generated by `embedding`, as (real parts, max |imag|).
pub fn circulant_eigenvalues(embedding: &[f64]) -> Result<(Vec<f64>, f64)> {
    let fft = FftPlan::new(embedding.len())?;
    let mut buf: Vec<Complex64> = embedding.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut buf);
    let max_imag = buf.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok((buf.into_iter().map(|v| v.re).collect(), max_imag))
}

/// Output of the length search: everything the synthesis step needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPlan {
    params: MlParams,
    t_req: usize,
    t_opt: usize,
    eigenvalues: Vec<f64>,
    clamp_count: usize,
    autocovariance: Vec<f64>,
    max_imag: f64,
}

impl SpectralPlan {
    pub fn params(&self) -> &MlParams {
        &self.params
    }

    pub fn t_req(&self) -> usize {
        self.t_req
    }

    pub fn t_opt(&self) -> usize {
        self.t_opt
    }

    /// `2·T_opt` non-negative circulant eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }

    /// `c_0..=c_{T_opt}` used to build the accepted embedding.
    pub fn autocovariance(&self) -> &[f64] {
        &self.autocovariance
    }

    /// Largest imaginary part seen in the accepted spectrum.
    pub fn max_imag(&self) -> f64 {
        self.max_imag
    }
}

/// Smallest power of two `≥ T` (then doubling, up to `ladder_cap`) whose
/// circulant embedding is non-negative definite up to round-off.
pub fn plan(params: &MlParams, t: usize, ladder_cap: usize) -> Result<SpectralPlan> {
    if !ladder_cap.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "ladder cap {ladder_cap} must be a power of two"
        )));
    }
    if t < 2 || t > ladder_cap {
        return Err(Error::InvalidArgument(format!(
            "noise length T = {t} must lie in [2, {ladder_cap}]"
        )));
    }
    let mut candidate = t.next_power_of_two();
    let mut cov = params.autocovariance(candidate)?;
    loop {
        let (mut eig, max_imag) = circulant_eigenvalues(&embed(&cov[..=candidate]))?;
        let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if !max.is_finite() || !min.is_finite() {
            return Err(Error::InvalidArgument("non-finite circulant eigenvalue".into()));
        }
        let eps = CLAMP_REL * max;
        if min >= -eps {
            let mut clamp_count = 0;
            for a in eig.iter_mut().filter(|a| **a < 0.0) {
                *a = 0.0;
                clamp_count += 1;
            }
            cov.truncate(candidate + 1);
            return Ok(SpectralPlan {
                params: *params,
                t_req: t,
                t_opt: candidate,
                eigenvalues: eig,
                clamp_count,
                autocovariance: cov,
                max_imag,
            });
        }
        if candidate >= ladder_cap {
            return Err(Error::NoValidLength {
                requested: t,
                cap: ladder_cap,
                min_eigenvalue: min,
            });
        }
        let next = candidate * 2;
        let extra: Vec<f64> = {
            use rayon::prelude::*;
            (candidate + 1..=next)
                .into_par_iter()
                .map(|k| params.acf_at(k as f64))
                .collect::<Result<_>>()?
        };
        cov.extend(extra);
        candidate = next;
    }
}
