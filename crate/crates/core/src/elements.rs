//! Linear optical elements acting on fields.

use std::f64::consts::{LN_2, SQRT_2};

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{from_spectrum_unchecked, to_spectrum, FrequencyGrid, SpectralField, TemporalField};
use crate::material::SampleStack;
use crate::units::{angular_frequency, bandwidth_to_angular, transform_limited_duration, wavelength_nm};

/// Quadratic spectral phase `A·Ω²` and the arrival offset of the anti-chirped pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpSpec {
    /// Positive for normal (up) chirp, negative for anti-chirp, fs².
    pub a_fs2: f64,
    /// Delay of the pulse relative to its partner at the beamsplitter, fs.
    pub overlap_offset_fs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChirpSign {
    Chirped,
    AntiChirped,
}

impl ChirpSign {
    fn factor(self) -> f64 {
        match self {
            ChirpSign::Chirped => 1.0,
            ChirpSign::AntiChirped => -1.0,
        }
    }
}

/// Chirp coefficient that stretches a Gaussian of spectral intensity FWHM
/// `spectral_fwhm` (rad/fs) to `target_duration` fs.
pub fn chirp_for_duration(target_duration: f64, spectral_fwhm: f64, sign: ChirpSign) -> Result<ChirpSpec> {
    if !(spectral_fwhm > 0.0) || !(target_duration > 0.0) {
        return Err(Error::InvalidArgument(
            "chirp target duration and bandwidth must be positive".into(),
        ));
    }
    let limit = transform_limited_duration(spectral_fwhm);
    if target_duration < 10.0 * limit {
        return Err(Error::InvalidArgument(format!(
            "stretched duration {target_duration} fs is below 10× the transform limit ({limit:.1} fs)"
        )));
    }
    Ok(ChirpSpec {
        a_fs2: sign.factor() * target_duration / (2.0 * spectral_fwhm),
        overlap_offset_fs: 0.0,
    })
}

/// Excess spectral phase of `stack` at every point of `grid`.
pub fn material_phase(stack: &SampleStack, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    for layer in &stack.layers {
        layer.material.validate_band(grid)?;
    }
    Ok((0..grid.n_points()).map(|k| stack.phase(grid.omega(k))).collect())
}

pub fn apply_spectral_phase(field: &SpectralField, phase: &[f64]) -> Result<SpectralField> {
    if phase.len() != field.samples.len() {
        return Err(Error::LengthMismatch {
            expected: field.samples.len(),
            actual: phase.len(),
        });
    }
    Ok(SpectralField {
        grid: field.grid,
        samples: field
            .samples
            .iter()
            .zip(phase)
            .map(|(z, &p)| z * Complex64::from_polar(1.0, p))
            .collect(),
    })
}

/// Applies `A·Ω²` to a temporal field.
pub fn apply_chirp(field: &TemporalField, a_fs2: f64) -> TemporalField {
    let mut spectrum = to_spectrum(field);
    for (k, z) in spectrum.samples.iter_mut().enumerate() {
        let w = spectrum.grid.detuning(k);
        *z *= Complex64::from_polar(1.0, a_fs2 * w * w);
    }
    from_spectrum_unchecked(&spectrum, &field.grid)
}

/// Lossless 50:50 beamsplitter: returns `((c + a)/√2, (c − a)/√2)`.
pub fn beamsplitter_combine(
    chirped: &TemporalField,
    antichirped: &TemporalField,
) -> Result<(TemporalField, TemporalField)> {
    if !chirped.matches(antichirped) {
        return Err(Error::GridMismatch);
    }
    let combine = |sign: f64| TemporalField {
        grid: chirped.grid,
        carrier: chirped.carrier,
        samples: chirped
            .samples
            .iter()
            .zip(&antichirped.samples)
            .map(|(c, a)| (c + sign * a) / SQRT_2)
            .collect(),
    };
    Ok((combine(1.0), combine(-1.0)))
}

pub fn check_transmission(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!(
            "transmission must lie in [0, 1], got {eta}"
        )));
    }
    Ok(())
}

/// Scales the field amplitude by √η.
pub fn attenuate(field: &TemporalField, eta: f64) -> Result<TemporalField> {
    check_transmission(eta)?;
    Ok(field.scaled(eta.sqrt()))
}

/// Exact time translation of the full field by `tau` fs (envelope and carrier).
pub fn delay_field(field: &TemporalField, tau: f64) -> Result<TemporalField> {
    let guard = field.grid.guard_band();
    if tau.abs() >= guard {
        return Err(Error::WrapAround {
            shift_fs: tau,
            guard_fs: guard,
        });
    }
    let mut spectrum = to_spectrum(field);
    for (k, z) in spectrum.samples.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, spectrum.grid.omega(k) * tau);
    }
    Ok(from_spectrum_unchecked(&spectrum, &field.grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    #[default]
    Gaussian,
    Rectangular,
}

/// Bandpass filter specified in wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filter {
    pub centre_wavelength_nm: f64,
    /// Intensity FWHM; `f64::INFINITY` passes everything.
    pub bandwidth_nm: f64,
    pub shape: FilterShape,
}

impl Filter {
    pub fn centre_omega(&self) -> f64 {
        angular_frequency(self.centre_wavelength_nm)
    }

    pub fn angular_bandwidth(&self) -> f64 {
        bandwidth_to_angular(self.bandwidth_nm, self.centre_wavelength_nm)
    }

    /// Amplitude transmission at absolute frequency `omega`.
    pub fn amplitude(&self, omega: f64) -> f64 {
        if self.bandwidth_nm.is_infinite() {
            return 1.0;
        }
        let x = (omega - self.centre_omega()) / self.angular_bandwidth();
        match self.shape {
            FilterShape::Gaussian => (-2.0 * LN_2 * x * x).exp(),
            FilterShape::Rectangular => {
                if x.abs() <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn check_band(&self, grid: &FrequencyGrid) -> Result<()> {
        if !(self.bandwidth_nm > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "filter bandwidth must be positive, got {} nm",
                self.bandwidth_nm
            )));
        }
        if !grid.contains(self.centre_omega()) {
            return Err(Error::OutOfBand {
                what: "filter centre".into(),
                wavelength_nm: self.centre_wavelength_nm,
            });
        }
        Ok(())
    }

    /// Amplitude transmission sampled on `grid`.
    pub fn transmission(&self, grid: &FrequencyGrid) -> Result<Vec<f64>> {
        self.check_band(grid)?;
        Ok((0..grid.n_points()).map(|k| self.amplitude(grid.omega(k))).collect())
    }
}

pub fn bandpass_filter(spectrum: &SpectralField, filter: &Filter) -> Result<SpectralField> {
    let t = filter.transmission(&spectrum.grid)?;
    Ok(SpectralField {
        grid: spectrum.grid,
        samples: spectrum.samples.iter().zip(&t).map(|(z, a)| z * a).collect(),
    })
}

/// Wavelength of grid point `k`, nm.
pub fn grid_wavelength_nm(grid: &FrequencyGrid, k: usize) -> f64 {
    wavelength_nm(grid.omega(k))
}
