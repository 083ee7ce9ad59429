//! Fixtures shared by the benchmarks.

use sbfe_core::generators::{gen_address, gen_tribes};
use sbfe_core::num::int;
use sbfe_core::Instance;

/// `(label, instance)` pairs of increasing size.
pub fn tribes_ladder() -> Vec<(String, Instance)> {
    [(2, 2), (3, 3), (3, 4), (4, 4)]
        .into_iter()
        .map(|(k, w)| (format!("tribes_{k}x{w}"), gen_tribes(k, w).expect("small tribes")))
        .collect()
}

pub fn address(d: usize) -> Instance {
    gen_address(d, &int(1)).expect("small address function")
}
