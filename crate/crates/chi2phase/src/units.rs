//! Physical constants (SI) and unit conversions.
//!
//! All internal quantities are SI: angular frequencies in rad/s, lengths in
//! meters. Ordinary frequencies in THz and lengths in micrometers appear
//! only at API boundaries.

use std::f64::consts::TAU;

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum speed of light [m/s].
pub const C_LIGHT: f64 = 2.997_924_58e8;
/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Ordinary frequency in THz to angular frequency in rad/s.
pub fn thz_to_angular(f_thz: f64) -> f64 {
    TAU * f_thz * 1e12
}

/// Angular frequency in rad/s to ordinary frequency in THz.
pub fn angular_to_thz(omega: f64) -> f64 {
    omega / (TAU * 1e12)
}

/// Micrometers to meters.
pub fn um_to_m(um: f64) -> f64 {
    um * 1e-6
}

/// Square micrometers to square meters.
pub fn um2_to_m2(um2: f64) -> f64 {
    um2 * 1e-12
}

/// Full width at half maximum of an intensity profile |u|^2 to the standard
/// deviation of that intensity profile.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}
