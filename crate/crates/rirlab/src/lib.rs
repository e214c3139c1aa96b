//! Room-acoustics toolkit: shoebox RIR simulation, echo-density analysis,
//! RIR decomposition, calibration-scenario dataset generation, acoustic
//! metrics, analytic distance estimators, and an evaluation harness.

pub mod acoustics;
pub mod baselines;
pub mod convolve;
pub mod dataset;
pub mod decompose;
pub mod echo_density;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod ism;
pub mod materials;
pub mod rng;
pub mod room;
pub mod sampling;
pub mod scenario;
pub mod speech;
pub mod util;
pub mod wav;

pub use error::{Error, Result};

/// Run `f` on a worker pool of `threads` threads (0 = default pool size).
/// Without the `parallel` feature the closure runs on the calling thread.
#[cfg(feature = "parallel")]
pub fn run_with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run_with_threads<T: Send>(_threads: usize, f: impl FnOnce() -> T + Send) -> T {
    f()
}
