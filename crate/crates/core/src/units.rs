//! Unit conversions. Every angular frequency inside the crate is in rad/s.

use std::f64::consts::TAU;

/// rad/s per Hz.
pub const RAD_PER_HZ: f64 = TAU;

pub fn hz_to_rad(hz: f64) -> f64 {
    hz * TAU
}

pub fn rad_to_hz(rad_s: f64) -> f64 {
    rad_s / TAU
}

pub fn ghz_to_rad(ghz: f64) -> f64 {
    ghz * 1e9 * TAU
}

pub fn rad_to_ghz(rad_s: f64) -> f64 {
    rad_s / (1e9 * TAU)
}

pub fn mhz_to_rad(mhz: f64) -> f64 {
    mhz * 1e6 * TAU
}

pub fn rad_to_mhz(rad_s: f64) -> f64 {
    rad_s / (1e6 * TAU)
}

/// Milligauss to gauss.
pub fn mg_to_gauss(mg: f64) -> f64 {
    mg * 1e-3
}

pub fn gauss_to_mg(gauss: f64) -> f64 {
    gauss * 1e3
}
