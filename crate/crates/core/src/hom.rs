//! Two-photon coincidence rate of a Hong–Ou–Mandel interferometer, evaluated
//! by direct quadrature as the reference for the chirped-pulse dip.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::material::SampleStack;
use crate::scan::{Interferogram, ScanSpec, TraceKind};
use crate::units::stage_to_delay;

/// Default number of quadrature points.
pub const DEFAULT_POINTS: usize = 4097;
/// Half-width of the default Ω grid in standard deviations of the weight.
pub const DEFAULT_SIGMAS: f64 = 4.0;

/// Joint spectral weight |f(Ω)|² on a grid symmetric about Ω = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonSpectrum {
    pub omega: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BiphotonSpectrum {
    pub fn new(omega: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if omega.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: omega.len(),
                actual: weights.len(),
            });
        }
        if omega.len() < 3 {
            return Err(Error::TooFewPoints(omega.len()));
        }
        let n = omega.len();
        let scale = omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let symmetric = (0..n).all(|i| (omega[i] + omega[n - 1 - i]).abs() <= 1e-12 * scale);
        if !symmetric || omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "Ω grid must be increasing and symmetric about zero".into(),
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::InvalidArgument(
                "spectral weights must be non-negative with a positive sum".into(),
            ));
        }
        Ok(BiphotonSpectrum { omega, weights })
    }

    /// Weights `exp(−(Ω − μ)²/2σ²)` on `points` samples spanning ±half_width.
    fn sampled_gaussian(mean: f64, sigma: f64, half_width: f64, points: usize) -> Result<Self> {
        if !(sigma > 0.0) || points < 3 {
            return Err(Error::InvalidArgument(
                "Gaussian spectrum needs σ > 0 and at least 3 points".into(),
            ));
        }
        let step = 2.0 * half_width / (points - 1) as f64;
        let omega: Vec<f64> = (0..points)
            .map(|i| (i as f64 - (points - 1) as f64 / 2.0) * step)
            .collect();
        let weights = omega
            .iter()
            .map(|w| (-(w - mean).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        Self::new(omega, weights)
    }

    /// Gaussian weights of standard deviation `sigma` over ±4σ.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::gaussian_with_points(sigma, DEFAULT_POINTS)
    }

    pub fn gaussian_with_points(sigma: f64, points: usize) -> Result<Self> {
        Self::sampled_gaussian(0.0, sigma, DEFAULT_SIGMAS * sigma, points)
    }

    /// Product weights `S_c(ω₀'+Ω)·S_a(ω₀'−Ω)` of two Gaussian intensity spectra
    /// (intensity FWHM `chirped_fwhm`, `anti_fwhm`, both rad/fs) centred on the laser
    /// carrier, with ω₀' = carrier + `offset`.
    pub fn from_product(chirped_fwhm: f64, anti_fwhm: f64, offset: f64) -> Result<Self> {
        Self::from_product_with_points(chirped_fwhm, anti_fwhm, offset, DEFAULT_POINTS)
    }

    pub fn from_product_with_points(chirped_fwhm: f64, anti_fwhm: f64, offset: f64, points: usize) -> Result<Self> {
        if !(chirped_fwhm > 0.0) || !(anti_fwhm > 0.0) {
            return Err(Error::InvalidArgument("spectral widths must be positive".into()));
        }
        // exp(−4ln2[(d+Ω)²/Δc² + (d−Ω)²/Δa²]) is a Gaussian in Ω
        let (pc, pa) = (1.0 / chirped_fwhm.powi(2), 1.0 / anti_fwhm.powi(2));
        let curvature = 4.0 * LN_2 * (pc + pa);
        let sigma = (0.5 / curvature).sqrt();
        let mean = -offset * (pc - pa) / (pc + pa);
        let half_width = mean.abs() + DEFAULT_SIGMAS * sigma;
        Self::sampled_gaussian(mean, sigma, half_width, points)
    }

    /// Trapezoid rule with the leading Euler–Maclaurin end correction, which
    /// matters because the weights are truncated at a finite width.
    fn trapezoid(&self, f: impl Fn(usize) -> f64) -> f64 {
        let x = &self.omega;
        let n = x.len();
        let sum: f64 = x
            .windows(2)
            .enumerate()
            .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i) + f(i + 1)))
            .sum();
        let (h0, h1) = (x[1] - x[0], x[n - 1] - x[n - 2]);
        let d0 = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h0);
        let d1 = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h1);
        sum - (h1 * h1 * d1 - h0 * h0 * d0) / 12.0
    }
}

/// Sample dispersion as seen by the coincidence integral.
#[derive(Debug, Clone, PartialEq)]
pub enum HomSample {
    /// Phase `Σ c_k Ω^k`, coefficients for k = 1, 2, … already multiplied by thickness.
    Taylor(Vec<f64>),
    /// A material stack centred on `centre_omega`.
    Stack { stack: SampleStack, centre_omega: f64 },
}

impl HomSample {
    pub fn vacuum() -> Self {
        HomSample::Taylor(vec![])
    }

    /// Pure group delay `αL`, fs.
    pub fn group_delay_only(alpha_l: f64) -> Self {
        HomSample::Taylor(vec![alpha_l])
    }

    /// Sample phase at detuning Ω, relative to Ω = 0.
    pub fn phase(&self, detuning: f64) -> f64 {
        match self {
            HomSample::Taylor(c) => c.iter().enumerate().map(|(i, c)| c * detuning.powi(i as i32 + 1)).sum(),
            HomSample::Stack { stack, centre_omega } => {
                stack.phase(centre_omega + detuning) - stack.phase(*centre_omega)
            }
        }
    }

    /// Odd part φ(Ω) − φ(−Ω); even orders are absent by construction.
    pub fn odd_difference(&self, detuning: f64) -> f64 {
        match self {
            HomSample::Taylor(c) => {
                2.0 * c
                    .iter()
                    .enumerate()
                    .step_by(2)
                    .map(|(i, c)| c * detuning.powi(i as i32 + 1))
                    .sum::<f64>()
            }
            HomSample::Stack { stack, centre_omega } => stack.odd_difference(*centre_omega, detuning),
        }
    }

    /// Delay at which the dip is centred: the group delay at the centre frequency.
    pub fn group_delay(&self) -> Result<f64> {
        match self {
            HomSample::Taylor(c) => Ok(c.first().copied().unwrap_or(0.0)),
            HomSample::Stack { stack, centre_omega } => stack.group_delay(*centre_omega),
        }
    }
}

/// `(φ_rr, φ_tt)`: phases of the two-photon amplitudes for both photons reflected
/// and both transmitted, at detuning Ω and delay τ.
pub fn phases(detuning: f64, sample: &HomSample, tau: f64) -> (f64, f64) {
    (
        sample.phase(detuning) - detuning * tau,
        sample.phase(-detuning) + detuning * tau,
    )
}

/// `φ_rr − φ_tt`, evaluated from the odd part of the sample phase.
pub fn phase_difference(detuning: f64, sample: &HomSample, tau: f64) -> f64 {
    sample.odd_difference(detuning) - 2.0 * detuning * tau
}

/// Normalised coincidence rate `∫w(1 − cos Δ) / ∫w`; unity far from the dip.
pub fn coincidence_rate(spectrum: &BiphotonSpectrum, sample: &HomSample, tau: f64) -> f64 {
    let integrand: Vec<f64> = spectrum
        .omega
        .iter()
        .zip(&spectrum.weights)
        .map(|(&w, &p)| {
            let half = 0.5 * phase_difference(w, sample, tau);
            2.0 * p * half.sin().powi(2)
        })
        .collect();
    let num = spectrum.trapezoid(|i| integrand[i]);
    let den = spectrum.trapezoid(|i| spectrum.weights[i]);
    num / den
}

pub fn hom_dip(spectrum: &BiphotonSpectrum, sample: &HomSample, scan: &ScanSpec) -> Result<Interferogram> {
    let positions = scan.positions()?;
    let signal = positions
        .iter()
        .map(|&x| coincidence_rate(spectrum, sample, stage_to_delay(x)))
        .collect();
    Interferogram::new(positions, signal, TraceKind::HomDip)
}
