//! Shared fixtures for the benchmarks.

use uwoc_core::cascade::UwocStack;
use uwoc_core::mixed::MixedLinkConfig;
use uwoc_core::reference as r;

pub fn gg_stack(rho2: f64) -> UwocStack {
    r::stack(r::gg_layers(), rho2).expect("reference stack")
}

pub fn egg_stack(rho2: f64) -> UwocStack {
    r::stack(r::egg_layers(), rho2).expect("reference stack")
}

/// Weak turbulence, light fog, both hops at the average SNR of `power_dbm`.
pub fn mixed_link(power_dbm: f64) -> MixedLinkConfig {
    let gb = r::gamma_bar_from_power(power_dbm, r::NOISE_VARIANCE);
    MixedLinkConfig {
        towc: r::towc(0, 0, 1.0).expect("reference terrestrial hop"),
        towc_gamma_bar: gb,
        stack: r::stack_with_path(r::egg_layers(), 1.0).expect("reference stack"),
        uwoc_gamma_bar: gb,
        relay_gain: r::RELAY_GAIN,
    }
}
