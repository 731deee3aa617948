//! Benchmark fixtures.

use rankfx::simulation::{generate_dataset, Distribution, SimSetting};
use rankfx::{Dataset, RngStream};

/// Values with frequent ties, `n` long.
pub fn tied_values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed);
    (0..n).map(|_| (rng.standard_normal() * 4.0).round()).collect()
}

/// A simulated dataset with `d` groups of size `n`.
pub fn simulated(d: usize, n: usize, seed: u64) -> Dataset {
    let setting = SimSetting::custom(vec![n; d], vec![1.0; d], vec![0.0; d], Distribution::Normal).expect("valid setting");
    generate_dataset(&setting, &mut RngStream::new(seed))
}
