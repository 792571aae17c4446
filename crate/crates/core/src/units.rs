//! Project-wide unit conventions.
//!
//! Time is in femtoseconds, angular frequency in rad/fs, wavelength in nm,
//! sample thickness in mm and translation-stage position in μm.

use std::f64::consts::PI;

/// Speed of light in μm/fs.
pub const C_UM_PER_FS: f64 = 0.299_792_458;

/// Speed of light in nm/fs.
pub const C_NM_PER_FS: f64 = 299.792_458;

/// 2√(2 ln 2): ratio between the FWHM and the standard deviation of a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Angular frequency (rad/fs) of light with vacuum wavelength `wavelength_nm`.
pub fn angular_frequency(wavelength_nm: f64) -> f64 {
    2.0 * PI * C_NM_PER_FS / wavelength_nm
}

/// Vacuum wavelength (nm) of light with angular frequency `omega`.
pub fn wavelength_nm(omega: f64) -> f64 {
    2.0 * PI * C_NM_PER_FS / omega
}

/// Converts a small wavelength interval at `centre_nm` into an angular-frequency interval.
pub fn bandwidth_to_angular(width_nm: f64, centre_nm: f64) -> f64 {
    2.0 * PI * C_NM_PER_FS * width_nm / (centre_nm * centre_nm)
}

/// Converts a small angular-frequency interval at `centre_nm` into a wavelength interval.
pub fn angular_to_bandwidth(width: f64, centre_nm: f64) -> f64 {
    width * centre_nm * centre_nm / (2.0 * PI * C_NM_PER_FS)
}

/// Delay produced by the retro-reflecting stage: the light travels the offset twice.
pub fn stage_to_delay(position_um: f64) -> f64 {
    2.0 * position_um / C_UM_PER_FS
}

pub fn delay_to_stage(delay_fs: f64) -> f64 {
    delay_fs * C_UM_PER_FS / 2.0
}

/// Time-bandwidth product of a transform-limited Gaussian, Δt·Δω with both
/// widths taken as intensity FWHM.
pub const GAUSSIAN_TBP_ANGULAR: f64 = 4.0 * std::f64::consts::LN_2;

/// Intensity FWHM duration of a transform-limited Gaussian pulse with
/// angular spectral FWHM `spectral_fwhm`.
pub fn transform_limited_duration(spectral_fwhm: f64) -> f64 {
    GAUSSIAN_TBP_ANGULAR / spectral_fwhm
}
