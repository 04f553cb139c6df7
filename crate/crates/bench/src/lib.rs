//! Fixtures shared by the benchmarks.

use ordsel_core::{generate, Dataset, SynthConfig};

/// Standardized synthetic data with three informative features.
pub fn fixture(seed: u64, n: usize, p: usize, m: usize) -> Dataset {
    generate(&SynthConfig {
        seed,
        n,
        p,
        m,
        true_features: 3.min(p),
        coef_scale: 1.0,
    })
    .and_then(|s| s.dataset())
    .expect("synthetic fixture")
}
