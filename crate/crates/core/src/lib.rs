//! Gaussian noise with Mittag-Leffler correlations.
//!
//! The crate evaluates the correlation law, finds a non-negative definite
//! circulant embedding of it, synthesizes exact Gaussian sequences from the
//! embedding spectrum, and provides the empirical estimators used to check
//! generated batches against the theory.
//!
//! ```
//! use mlnoise::{generate, plan, MlParams, DEFAULT_LADDER_CAP};
//!
//! let params = MlParams::new(1.0, 0.6, 10.0).unwrap();
//! let spec = plan(&params, 500, DEFAULT_LADDER_CAP).unwrap();
//! let batch = generate(&spec, 4, 500, Some(42)).unwrap();
//! assert_eq!((batch.n(), batch.t()), (4, 500));
//! ```

pub mod error;
pub mod estimators;
pub mod fft;
pub mod generator;
pub mod model;
mod quadrature;
pub mod special;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
pub use estimators::{
    acf_empirical, acf_empirical_with_mode, acf_statistics, integrate_trajectories, loglog_slope, msd_empirical,
    msd_statistics, AcfEstimate, MsdEstimate, TrajectoryBatch,
};
pub use generator::{
    generate, generate_streaming, generate_streaming_chunked, synthesis_operator, NoiseBatch, SeedPolicy,
    SynthesisOperator,
};
pub use model::{acf_theoretical, msd_theoretical, AcfMode, AcfSeries, MlParams, MsdSeries, SeriesKind};
pub use special::{gamma_fn, mittag_leffler, MlEvalConfig};
pub use spectral::{plan, SpectralPlan, DEFAULT_LADDER_CAP};
