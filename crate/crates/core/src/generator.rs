//! Davies-Harte synthesis of noise batches from a [`SpectralPlan`].
//!
//! For each sequence, `2·T_opt` standard normals `Z` are turned into Hermitian
//! spectral amplitudes
//!
//! ```text
//! Y_0     = sqrt(2 T_opt A_0) Z_0
//! Y_k     = sqrt(T_opt A_k) (Z_{2k-1} + i Z_{2k})      0 < k < T_opt
//! Y_Topt  = sqrt(2 T_opt A_Topt) Z_{2T_opt-1}
//! Y_k     = conj(Y_{2T_opt-k})                         T_opt < k < 2 T_opt
//! ```
//!
//! and inverse-transformed with the `1/(2T_opt)` convention. The first `T`
//! real parts form the output, whose covariance is exactly `c_{|i-j|}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::model::MlParams;
use crate::spectral::SpectralPlan;

/// Upper bound on transient workspace held by one generation chunk, in doubles.
pub const CHUNK_WORKSPACE_DOUBLES: usize = 1 << 26;

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Master seed plus the rule that derives one RNG stream per sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    master_seed: u64,
    from_entropy: bool,
}

impl SeedPolicy {
    pub fn fixed(seed: u64) -> Self {
        Self {
            master_seed: seed,
            from_entropy: false,
        }
    }

    /// Draws the master seed from the operating system.
    pub fn entropy() -> Self {
        Self {
            master_seed: rand::random(),
            from_entropy: true,
        }
    }

    pub fn from_option(seed: Option<u64>) -> Self {
        seed.map_or_else(Self::entropy, Self::fixed)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn from_entropy(&self) -> bool {
        self.from_entropy
    }

    /// Seed of sequence `index`. Both mixing steps are bijections, so distinct
    /// indices never share a stream.
    pub fn substream_seed(&self, index: u64) -> u64 {
        mix64(self.master_seed ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
    }

    pub fn rng(&self, index: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.substream_seed(index))
    }
}

/// `N` sequences of length `T`, row-major, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBatch {
    n: usize,
    t: usize,
    data: Vec<f64>,
    params: Option<MlParams>,
    seed: Option<u64>,
    plan_t_opt: Option<usize>,
}

impl NoiseBatch {
    /// Wraps externally produced samples; provenance fields stay empty.
    pub fn from_data(n: usize, t: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || t == 0 {
            return Err(Error::InvalidArgument(format!("empty batch ({n} x {t})")));
        }
        if data.len() != n * t {
            return Err(Error::InvalidArgument(format!(
                "batch of {n} x {t} needs {} values, got {}",
                n * t,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            n,
            t,
            data,
            params: None,
            seed: None,
            plan_t_opt: None,
        })
    }

    /// Attaches provenance to externally loaded samples.
    pub fn with_provenance(mut self, params: Option<MlParams>, seed: Option<u64>, t_opt: Option<usize>) -> Self {
        self.params = params;
        self.seed = seed;
        self.plan_t_opt = t_opt;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.t..(m + 1) * self.t]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.t)
    }

    pub fn params(&self) -> Option<&MlParams> {
        self.params.as_ref()
    }

    /// Resolved master seed for generated batches.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn plan_t_opt(&self) -> Option<usize> {
        self.plan_t_opt
    }
}

/// Per-plan amplitude table shared by all workers.
struct Amplitudes {
    t_opt: usize,
    scale: Vec<f64>,
    fft: FftPlan,
}

impl Amplitudes {
    fn new(plan: &SpectralPlan) -> Result<Self> {
        let t_opt = plan.t_opt();
        let m = 2 * t_opt;
        let eig = plan.eigenvalues();
        if eig.len() != m {
            return Err(Error::InvalidArgument("plan eigenvalue count mismatch".into()));
        }
        if let Some(k) = eig.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidArgument(format!("invalid eigenvalue A_{k} = {}", eig[k])));
        }
        let mut scale = Vec::with_capacity(t_opt + 1);
        scale.push((m as f64 * eig[0]).sqrt());
        for a in &eig[1..t_opt] {
            scale.push((t_opt as f64 * a).sqrt());
        }
        scale.push((m as f64 * eig[t_opt]).sqrt());
        Ok(Self {
            t_opt,
            scale,
            fft: FftPlan::new(m)?,
        })
    }

    fn len(&self) -> usize {
        2 * self.t_opt
    }

    /// Fills `buf` with iFFT(Y(z)).
    fn synthesize(&self, z: &[f64], buf: &mut [Complex64]) {
        let t_opt = self.t_opt;
        let m = 2 * t_opt;
        debug_assert_eq!(z.len(), m);
        buf[0] = Complex64::new(self.scale[0] * z[0], 0.0);
        for k in 1..t_opt {
            let y = Complex64::new(z[2 * k - 1], z[2 * k]) * self.scale[k];
            buf[k] = y;
            buf[m - k] = y.conj();
        }
        buf[t_opt] = Complex64::new(self.scale[t_opt] * z[m - 1], 0.0);
        self.fft.inverse(buf);
    }
}

fn check_request(plan: &SpectralPlan, n: usize, t: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sequence count N must be at least 1".into()));
    }
    if t == 0 || t > plan.t_opt() {
        return Err(Error::InvalidArgument(format!(
            "sequence length T = {t} must lie in [1, T_opt = {}]",
            plan.t_opt()
        )));
    }
    Ok(())
}

/// Generates `n` sequences of length `t` in memory.
pub fn generate(plan: &SpectralPlan, n: usize, t: usize, seed: Option<u64>) -> Result<NoiseBatch> {
    let policy = SeedPolicy::from_option(seed);
    let mut data = Vec::with_capacity(n * t);
    generate_streaming(plan, n, t, &policy, |_, row| {
        data.extend_from_slice(row);
        Ok(())
    })?;
    Ok(NoiseBatch {
        n,
        t,
        data,
        params: Some(*plan.params()),
        seed: Some(policy.master_seed()),
        plan_t_opt: Some(plan.t_opt()),
    })
}

/// Generates sequences chunk by chunk and hands each row to `sink` in index
/// order. Rows within a chunk are synthesized in parallel on the current
/// rayon pool; the output does not depend on the pool size.
pub fn generate_streaming<F>(plan: &SpectralPlan, n: usize, t: usize, policy: &SeedPolicy, sink: F) -> Result<()>
where
    F: FnMut(usize, &[f64]) -> std::io::Result<()>,
{
    generate_streaming_chunked(plan, n, t, policy, CHUNK_WORKSPACE_DOUBLES, sink)
}

/// As [`generate_streaming`] with an explicit workspace bound per chunk
/// (at least one sequence is always in flight).
pub fn generate_streaming_chunked<F>(
    plan: &SpectralPlan,
    n: usize,
    t: usize,
    policy: &SeedPolicy,
    workspace_doubles: usize,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(usize, &[f64]) -> std::io::Result<()>,
{
    check_request(plan, n, t)?;
    let amps = Amplitudes::new(plan)?;
    let m = amps.len();
    // normals, complex buffer and output row
    let per_sequence = 3 * m + t;
    let chunk = (workspace_doubles / per_sequence).max(1);
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let rows: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map_init(
                || (vec![0.0; m], vec![Complex64::new(0.0, 0.0); m]),
                |(z, buf), idx| {
                    let mut rng = policy.rng(idx as u64);
                    for v in z.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    amps.synthesize(z, buf);
                    buf[..t].iter().map(|c| c.re).collect()
                },
            )
            .collect();
        for (offset, row) in rows.iter().enumerate() {
            sink(start + offset, row).map_err(|e| Error::InvalidArgument(format!("sink failed: {e}")))?;
        }
        start = end;
    }
    Ok(())
}

/// Dense `T_opt × 2T_opt` matrix of the linear map `Z ↦ ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOperator {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
}

impl SynthesisOperator {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// `L Lᵀ`, row-major `rows × rows`.
    pub fn gram(&self) -> Vec<f64> {
        let r = self.rows;
        let mut g = vec![0.0; r * r];
        g.par_chunks_mut(r).enumerate().for_each(|(i, out)| {
            let li = &self.data[i * self.cols..(i + 1) * self.cols];
            for (j, slot) in out.iter_mut().enumerate() {
                let lj = &self.data[j * self.cols..(j + 1) * self.cols];
                *slot = li.iter().zip(lj).map(|(a, b)| a * b).sum();
            }
        });
        g
    }
}

/// Column `j` is the synthesis pipeline applied to the unit vector `e_j`.
pub fn synthesis_operator(plan: &SpectralPlan) -> Result<SynthesisOperator> {
    let amps = Amplitudes::new(plan)?;
    let m = amps.len();
    let rows = plan.t_opt();
    let columns: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut z = vec![0.0; m];
            z[j] = 1.0;
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            amps.synthesize(&z, &mut buf);
            buf[..rows].iter().map(|c| c.re).collect()
        })
        .collect();
    let mut data = vec![0.0; rows * m];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[i * m + j] = *v;
        }
    }
    Ok(SynthesisOperator { rows, cols: m, data })
}

/// Largest `|Im ξ|` relative to `max |ξ|` for one synthesized sequence.
pub fn imaginary_residue(plan: &SpectralPlan, z: &[f64]) -> Result<f64> {
    let amps = Amplitudes::new(plan)?;
    if z.len() != amps.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} normals, got {}",
            amps.len(),
            z.len()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); amps.len()];
    amps.synthesize(z, &mut buf);
    let max_re = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let max_im = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    Ok(if max_re > 0.0 { max_im / max_re } else { max_im })
}
