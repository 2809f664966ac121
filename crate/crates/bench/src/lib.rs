//! Fixed inputs shared by the benchmarks.

use ktaxi_core::harness::{random_instance, TreeFamily};
use ktaxi_core::io::LoadedScenario;
use ktaxi_core::HstSpec;

/// Random requests on a binary HST of depth `d` with edge weights `2^(d-1), .., 1`.
pub fn hst_scenario(k: usize, d: usize, length: usize, seed: u64) -> LoadedScenario {
    let weights = (0..d).rev().map(|i| 1i64 << i).collect();
    let spec = HstSpec::new(weights, 2).expect("valid spec");
    random_instance(k, &TreeFamily::Hst { spec }, length, seed).load().expect("generated scenario loads")
}

/// Random requests on a random weighted tree.
pub fn weighted_scenario(k: usize, vertices: usize, length: usize, seed: u64) -> LoadedScenario {
    let family = TreeFamily::RandomWeighted { depth: 4, max_weight: 5, vertices };
    random_instance(k, &family, length, seed).load().expect("generated scenario loads")
}
