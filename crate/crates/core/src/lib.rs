//! Directional singular integrals on the discrete torus.
//!
//! The crate models functions on the unit torus by square power-of-two grids,
//! applies sharp and smooth frequency multipliers through the DFT, builds
//! lacunary direction sets with verifiable certificates, and measures the
//! norm growth of maximal directional operators.
//!
//! The numeric carrier is generic over [`scalar::Scalar`] (f32 or f64);
//! concrete f64 aliases are exported at the crate root and used by the CLI
//! and the experiment layer. Every operation is a pure function of immutable
//! inputs; internal parallelism only splits independent output elements, so
//! results are bit-identical regardless of thread count.

pub mod directions;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod field;
pub mod multipliers;
pub mod operators;
pub mod rng;
pub mod scalar;
pub mod si;
pub mod vectorfield;

pub use error::{CoreError, Result};

/// Re-export of the complex number type used throughout the field engine.
pub use num_complex::Complex;

/// Default f64 sample field.
pub type Field64 = field::ComplexField<f64>;
/// f32 sample field.
pub type Field32 = field::ComplexField<f32>;
/// Default f64 spectrum.
pub type Spectrum64 = field::SpectralField<f64>;
/// Default f64 real-valued field.
pub type Real64 = field::RealField<f64>;

/// Cap the global worker pool from LACUNA_THREADS. Call once at startup;
/// later calls (or an already-built pool) are ignored.
pub fn init_thread_pool_from_env() {
    if let Ok(v) = std::env::var("LACUNA_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
