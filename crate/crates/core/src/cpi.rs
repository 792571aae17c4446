//! Chirped-pulse interferometer: oppositely chirped pulses meet at a
//! beamsplitter, one output passes the sample, the other a variable delay, and
//! the filtered sum-frequency power is recorded against delay.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::{fit_gaussian_dip, FitResult};
use crate::elements::{
    apply_chirp, attenuate, beamsplitter_combine, check_transmission, chirp_for_duration, delay_field, material_phase,
    ChirpSign, ChirpSpec, Filter, FilterShape,
};
use crate::error::{Error, Result};
use crate::grid::{
    from_spectrum_unchecked, gaussian_pulse, make_grids, to_spectrum, Grids, SpectralField, TemporalField,
};
use crate::hom::{BiphotonSpectrum, HomSample};
use crate::material::SampleStack;
use crate::quadrature::gauss_hermite;
use crate::scan::{Interferogram, ScanSpec, SpectrumMap, TraceKind};
use crate::units::{
    angular_frequency, bandwidth_to_angular, delay_to_stage, stage_to_delay, wavelength_nm, GAUSSIAN_TBP_ANGULAR,
};

/// Quadrature nodes used for a finite SFG acceptance bandwidth.
pub const ACCEPTANCE_NODES: usize = 16;

/// Relative carrier phases of the anti-chirped pulse averaged over. The laser
/// does not lock the phase between the two stretched pulses, and the detected
/// power contains phase harmonics up to second order only, so three equally
/// spaced phases give the exact average.
pub const CARRIER_PHASES: [f64; 3] = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];

/// Delay from the dip centre at which the normalising reference power is taken, fs.
pub const REFERENCE_DELAY_FS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laser {
    pub centre_wavelength_nm: f64,
    pub pulse_duration_fs: f64,
}

impl Laser {
    pub fn carrier(&self) -> f64 {
        angular_frequency(self.centre_wavelength_nm)
    }

    /// Transform-limited spectral intensity FWHM, nm.
    pub fn bandwidth_nm(&self) -> f64 {
        crate::units::angular_to_bandwidth(GAUSSIAN_TBP_ANGULAR / self.pulse_duration_fs, self.centre_wavelength_nm)
    }
}

/// One stretched pulse: its spectral width and chirp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmSpec {
    pub bandwidth_nm: f64,
    pub chirp: ChirpSpec,
}

impl ArmSpec {
    pub fn angular_bandwidth(&self, centre_nm: f64) -> f64 {
        bandwidth_to_angular(self.bandwidth_nm, centre_nm)
    }

    /// Intensity FWHM after stretching, fs.
    pub fn stretched_duration(&self, centre_nm: f64) -> f64 {
        2.0 * self.chirp.a_fs2.abs() * self.angular_bandwidth(centre_nm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detector {
    /// Constant added to every reading, in units of the lossless off-dip signal.
    pub background: f64,
    /// Offset of the raw detector reading (removed again before analysis).
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub span_fs: f64,
}

/// Full description of the interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalSetup {
    pub laser: Laser,
    pub chirped: ArmSpec,
    /// The overlap offset of this arm delays the anti-chirped pulse.
    pub antichirped: ArmSpec,
    pub sample: SampleStack,
    pub transmission: f64,
    pub filter: Filter,
    /// Intensity FWHM of the phase-matching acceptance in fundamental detuning, nm.
    /// `None` is ideal phase matching.
    pub acceptance_nm: Option<f64>,
    pub detector: Detector,
    pub grid: GridSpec,
}

/// Default ratio of grid span to the longest stretched pulse.
pub const DEFAULT_SPAN_FACTOR: f64 = 8.0;
pub const DEFAULT_GRID_POINTS: usize = 1 << 15;

impl OpticalSetup {
    /// The experiment of the original demonstration: 790 nm, 110 fs laser, 10 nm and
    /// 9 nm stretched spectra with matched chirp rates (51.2 ps chirped pulse),
    /// 0.4 nm filter at 395.9 nm, no sample.
    pub fn paper() -> Self {
        let laser = Laser {
            centre_wavelength_nm: 790.0,
            pulse_duration_fs: 110.0,
        };
        let a = chirp_for_duration(51_200.0, bandwidth_to_angular(10.0, 790.0), ChirpSign::Chirped)
            .expect("paper chirp is valid")
            .a_fs2;
        let mut setup = OpticalSetup {
            laser,
            chirped: ArmSpec {
                bandwidth_nm: 10.0,
                chirp: ChirpSpec {
                    a_fs2: a,
                    overlap_offset_fs: 0.0,
                },
            },
            antichirped: ArmSpec {
                bandwidth_nm: 9.0,
                chirp: ChirpSpec {
                    a_fs2: -a,
                    overlap_offset_fs: 0.0,
                },
            },
            sample: SampleStack::vacuum(),
            transmission: 1.0,
            filter: Filter {
                centre_wavelength_nm: 395.9,
                bandwidth_nm: 0.4,
                shape: FilterShape::Gaussian,
            },
            acceptance_nm: None,
            detector: Detector::default(),
            grid: GridSpec {
                points: DEFAULT_GRID_POINTS,
                span_fs: 0.0,
            },
        };
        setup.fit_grid_span(DEFAULT_SPAN_FACTOR);
        setup.tune_overlap();
        setup
    }

    pub fn longest_stretched_duration(&self) -> f64 {
        let c = self.laser.centre_wavelength_nm;
        self.chirped
            .stretched_duration(c)
            .max(self.antichirped.stretched_duration(c))
    }

    /// Sets the grid span to `factor` times the longest stretched pulse.
    pub fn fit_grid_span(&mut self, factor: f64) {
        self.grid.span_fs = factor * self.longest_stretched_duration();
    }

    /// Half the filter centre frequency: the fundamental frequency pair the
    /// filtered cross-correlation signal is centred on.
    pub fn effective_centre_omega(&self) -> f64 {
        0.5 * self.filter.centre_omega()
    }

    /// Delays the anti-chirped pulse so that the cross-correlation sum
    /// frequency sits at the filter centre.
    pub fn tune_overlap(&mut self) {
        let shift = self.filter.centre_omega() - 2.0 * self.laser.carrier();
        self.antichirped.chirp.overlap_offset_fs = -2.0 * self.antichirped.chirp.a_fs2 * shift;
    }

    /// Sum-frequency offset from 2ω₀ produced by the current overlap offset, rad/fs.
    pub fn sum_frequency_shift(&self) -> f64 {
        -self.antichirped.chirp.overlap_offset_fs / (2.0 * self.antichirped.chirp.a_fs2)
    }

    pub fn grids(&self) -> Result<Grids> {
        make_grids(self.grid.span_fs, self.grid.points, self.laser.carrier())
    }

    pub fn validate(&self) -> Result<()> {
        check_transmission(self.transmission)?;
        for (name, arm) in [("chirped", &self.chirped), ("anti-chirped", &self.antichirped)] {
            if !(arm.bandwidth_nm > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} bandwidth must be positive")));
            }
            if arm.chirp.a_fs2 == 0.0 || !arm.chirp.a_fs2.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} chirp must be non-zero")));
            }
        }
        if self.chirped.chirp.a_fs2 < 0.0 || self.antichirped.chirp.a_fs2 > 0.0 {
            return Err(Error::InvalidArgument(
                "chirped pulse needs A > 0 and anti-chirped pulse A < 0".into(),
            ));
        }
        if !(self.detector.background >= 0.0) {
            return Err(Error::InvalidArgument("detector background must be ≥ 0".into()));
        }
        if let Some(acc) = self.acceptance_nm {
            if !(acc > 0.0) {
                return Err(Error::InvalidArgument("SFG acceptance must be positive".into()));
            }
        }
        let needed = 4.0 * self.longest_stretched_duration();
        if self.grid.span_fs < needed {
            return Err(Error::InvalidGrid(format!(
                "span {:.0} fs is shorter than 4× the longest stretched pulse ({needed:.0} fs)",
                self.grid.span_fs
            )));
        }
        Ok(())
    }

    /// Group delay of the sample at the effective centre frequency, fs.
    pub fn sample_group_delay(&self) -> Result<f64> {
        if self.sample.is_empty() {
            return Ok(0.0);
        }
        self.sample.group_delay(self.effective_centre_omega())
    }

    /// Stage position at which the dip is expected, μm.
    pub fn predicted_dip_position_um(&self) -> Result<f64> {
        Ok(delay_to_stage(self.sample_group_delay()?))
    }

    /// Two-photon spectrum and sample that give the coincidence dip this setup
    /// emulates: weights are the product of the two optical intensity spectra
    /// about the effective centre, and the sample is expanded about it as well.
    pub fn hom_equivalent(&self) -> Result<(BiphotonSpectrum, HomSample)> {
        let c = self.laser.centre_wavelength_nm;
        let centre = self.effective_centre_omega();
        let spectrum = BiphotonSpectrum::from_product(
            self.chirped.angular_bandwidth(c),
            self.antichirped.angular_bandwidth(c),
            centre - self.laser.carrier(),
        )?;
        let sample = if self.sample.is_empty() {
            HomSample::vacuum()
        } else {
            HomSample::Stack {
                stack: self.sample.clone(),
                centre_omega: centre,
            }
        };
        Ok((spectrum, sample))
    }

    pub fn acceptance(&self) -> SfgAcceptance {
        match self.acceptance_nm {
            None => SfgAcceptance::ideal(),
            Some(nm) => SfgAcceptance::gaussian(
                bandwidth_to_angular(nm, wavelength_nm(self.effective_centre_omega())),
                ACCEPTANCE_NODES,
            ),
        }
    }
}

/// Phase-matching acceptance as a function of the fundamental detuning Ω,
/// evaluated by Gauss–Hermite quadrature over a relative time shift `s`:
/// `SFG(t) = Σ_j w_j·d(t + s_j)·s(t − s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SfgAcceptance {
    shifts: Vec<f64>,
    weights: Vec<f64>,
}

impl SfgAcceptance {
    pub fn ideal() -> Self {
        SfgAcceptance {
            shifts: vec![0.0],
            weights: vec![1.0],
        }
    }

    /// Gaussian amplitude acceptance `exp(−2ln2·Ω²/ΔΩ²)` with intensity FWHM
    /// `fwhm` rad/fs in the detuning Ω of either photon.
    pub fn gaussian(fwhm: f64, nodes: usize) -> Self {
        let (u, w) = gauss_hermite(nodes);
        // kernel exp(−s²/2σ²)/(√(2π)σ) with σ² = ln2/ΔΩ²
        let sigma = std::f64::consts::LN_2.sqrt() / fwhm;
        SfgAcceptance {
            shifts: u.iter().map(|u| SQRT_2 * sigma * u).collect(),
            weights: w.iter().map(|w| w / PI.sqrt()).collect(),
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.shifts == [0.0]
    }

    pub fn max_shift(&self) -> f64 {
        self.shifts.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }
}

/// The two beamsplitter outputs ready for the delay scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedArms {
    /// Output `(c + a)/√2`, sent to the delay stage.
    pub delay: TemporalField,
    /// Output `(c − a)/√2` after the sample and its transmission.
    pub sample: TemporalField,
    /// Common time translation removed from both arms: the sample arm is advanced
    /// by this much, so a stage delay τ is applied as τ − offset.
    pub frame_offset_fs: f64,
}

impl PreparedArms {
    pub fn relative_delay(&self, tau: f64) -> f64 {
        tau - self.frame_offset_fs
    }
}

/// Builds the stretched pulses from transform-limited seeds of each arm's
/// bandwidth. Both seeds share the same peak spectral density.
pub fn stretched_pulses(setup: &OpticalSetup, grids: &Grids, phase: f64) -> Result<(TemporalField, TemporalField)> {
    let c_nm = setup.laser.centre_wavelength_nm;
    let dw_c = setup.chirped.angular_bandwidth(c_nm);
    let dw_a = setup.antichirped.angular_bandwidth(c_nm);
    let seed_c = gaussian_pulse(grids, GAUSSIAN_TBP_ANGULAR / dw_c, 1.0)?;
    let seed_a = gaussian_pulse(grids, GAUSSIAN_TBP_ANGULAR / dw_a, dw_a / dw_c)?;
    let chirped = apply_chirp(&seed_c, setup.chirped.chirp.a_fs2);
    let rotation = Complex64::from_polar(1.0, phase);
    let mut anti = apply_chirp(&seed_a, setup.antichirped.chirp.a_fs2);
    for z in &mut anti.samples {
        *z *= rotation;
    }
    let anti = delay_field(&anti, setup.antichirped.chirp.overlap_offset_fs)?;
    Ok((chirped, anti))
}

pub fn prepare_arms(setup: &OpticalSetup) -> Result<PreparedArms> {
    prepare_arms_with_phase(setup, 0.0)
}

/// As [`prepare_arms`] with the anti-chirped pulse's carrier rotated by `phase`.
pub fn prepare_arms_with_phase(setup: &OpticalSetup, phase: f64) -> Result<PreparedArms> {
    setup.validate()?;
    let grids = setup.grids()?;
    let (chirped, anti) = stretched_pulses(setup, &grids, phase)?;
    let (delay, sample) = beamsplitter_combine(&chirped, &anti)?;
    let frame_offset_fs = setup.sample_group_delay()?;
    let sample = through_sample(&sample, &setup.sample, frame_offset_fs)?;
    let sample = attenuate(&sample, setup.transmission)?;
    Ok(PreparedArms {
        delay,
        sample,
        frame_offset_fs,
    })
}

/// Applies the stack's phase together with a time advance of `frame_offset` fs.
pub fn through_sample(field: &TemporalField, stack: &SampleStack, frame_offset: f64) -> Result<TemporalField> {
    if stack.is_empty() && frame_offset == 0.0 {
        return Ok(field.clone());
    }
    let mut spectrum = to_spectrum(field);
    let phase = material_phase(stack, &spectrum.grid)?;
    for (k, z) in spectrum.samples.iter_mut().enumerate() {
        let w = spectrum.grid.omega(k);
        *z *= Complex64::from_polar(1.0, phase[k] - w * frame_offset);
    }
    Ok(from_spectrum_unchecked(&spectrum, &field.grid))
}

fn check_delay(field: &TemporalField, tau: f64, acceptance: &SfgAcceptance) -> Result<()> {
    let guard = field.grid.guard_band();
    let reach = tau.abs() + acceptance.max_shift();
    if reach >= guard {
        return Err(Error::WrapAround {
            shift_fs: tau,
            guard_fs: guard,
        });
    }
    Ok(())
}

fn translated(spectrum: &SpectralField, grid: &crate::grid::TimeGrid, shift: f64) -> TemporalField {
    let mut s = spectrum.clone();
    for (k, z) in s.samples.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, s.grid.omega(k) * shift);
    }
    from_spectrum_unchecked(&s, grid)
}

/// Sum-frequency field of the delay arm shifted by `tau` and the sample arm.
pub fn sfg_field(
    delay_arm: &TemporalField,
    sample_arm: &TemporalField,
    tau: f64,
    acceptance: &SfgAcceptance,
) -> Result<TemporalField> {
    if !delay_arm.matches(sample_arm) {
        return Err(Error::GridMismatch);
    }
    check_delay(delay_arm, tau, acceptance)?;
    let delayed = delay_field(delay_arm, tau)?;
    let mut out = TemporalField::zeros(delay_arm.grid, delay_arm.carrier + sample_arm.carrier);
    if acceptance.is_ideal() {
        for ((o, d), s) in out.samples.iter_mut().zip(&delayed.samples).zip(&sample_arm.samples) {
            *o = d * s;
        }
        return Ok(out);
    }
    let d_spec = to_spectrum(&delayed);
    let s_spec = to_spectrum(sample_arm);
    for (&shift, &weight) in acceptance.shifts.iter().zip(&acceptance.weights) {
        let d = translated(&d_spec, &delay_arm.grid, -shift);
        let s = translated(&s_spec, &delay_arm.grid, shift);
        for ((o, d), s) in out.samples.iter_mut().zip(&d.samples).zip(&s.samples) {
            *o += weight * d * s;
        }
    }
    Ok(out)
}

/// Filtered SFG energy plus the detector background.
pub fn detect(sfg: &TemporalField, filter: &Filter, background: f64) -> Result<f64> {
    let spectrum = to_spectrum(sfg);
    let t = filter.transmission(&spectrum.grid)?;
    let energy: f64 = spectrum
        .samples
        .iter()
        .zip(&t)
        .map(|(z, a)| z.norm_sqr() * a * a)
        .sum::<f64>()
        * spectrum.grid.d_omega()
        / (2.0 * PI);
    Ok(energy.max(0.0) + background)
}

/// Per-phase precomputation for fast delay scans.
struct PhaseArms {
    delay_spectrum: SpectralField,
    /// Sample arm translated by each acceptance shift.
    sample_nodes: Vec<TemporalField>,
}

/// Delay-scan evaluator. Equivalent to composing [`delay_field`], [`sfg_field`]
/// and [`detect`] at every delay, but reuses everything that does not depend on
/// the delay and averages over [`CARRIER_PHASES`].
pub struct CpiEngine {
    arms: Vec<PhaseArms>,
    acceptance: SfgAcceptance,
    filter_power: Vec<f64>,
    grid: crate::grid::TimeGrid,
    d_omega: f64,
    frame_offset_fs: f64,
    scale: f64,
    background: f64,
}

impl CpiEngine {
    pub fn new(setup: &OpticalSetup) -> Result<Self> {
        let mut engine = Self::unnormalised(setup)?;
        // normalise to the lossless, sample-free signal just outside the dip
        let mut reference = setup.clone();
        reference.sample = SampleStack::vacuum();
        reference.transmission = 1.0;
        let reference = Self::unnormalised(&reference)?;
        let p = reference.raw_power(REFERENCE_DELAY_FS)?;
        if !(p > 0.0) {
            return Err(Error::ZeroBaseline);
        }
        engine.scale = 1.0 / p;
        Ok(engine)
    }

    fn unnormalised(setup: &OpticalSetup) -> Result<Self> {
        setup.validate()?;
        let acceptance = setup.acceptance();
        let mut arms = Vec::with_capacity(CARRIER_PHASES.len());
        let mut frame_offset_fs = 0.0;
        let mut grid = None;
        for &phase in &CARRIER_PHASES {
            let prepared = prepare_arms_with_phase(setup, phase)?;
            frame_offset_fs = prepared.frame_offset_fs;
            grid = Some(prepared.delay.grid);
            let s_spec = to_spectrum(&prepared.sample);
            let sample_nodes = acceptance
                .shifts
                .iter()
                .map(|&s| {
                    if s == 0.0 {
                        prepared.sample.clone()
                    } else {
                        translated(&s_spec, &prepared.sample.grid, s)
                    }
                })
                .collect();
            arms.push(PhaseArms {
                delay_spectrum: to_spectrum(&prepared.delay),
                sample_nodes,
            });
        }
        let grid = grid.expect("at least one carrier phase");
        let sfg_grid = grid.frequency_grid(2.0 * setup.laser.carrier());
        let filter_power = setup
            .filter
            .transmission(&sfg_grid)?
            .into_iter()
            .map(|a| a * a)
            .collect();
        Ok(CpiEngine {
            arms,
            acceptance,
            filter_power,
            grid,
            d_omega: sfg_grid.d_omega(),
            frame_offset_fs,
            scale: 1.0,
            background: setup.detector.background,
        })
    }

    pub fn frame_offset_fs(&self) -> f64 {
        self.frame_offset_fs
    }

    /// Phase-averaged SFG field spectra at relative delay `tau_rel`.
    fn sfg_spectra(&self, tau_rel: f64) -> Result<Vec<SpectralField>> {
        let guard = self.grid.guard_band();
        if tau_rel.abs() + self.acceptance.max_shift() >= guard {
            return Err(Error::WrapAround {
                shift_fs: tau_rel,
                guard_fs: guard,
            });
        }
        Ok(self
            .arms
            .iter()
            .map(|arm| {
                let carrier = arm.delay_spectrum.grid.omega_offset() + arm.sample_nodes[0].carrier;
                let mut sfg = TemporalField::zeros(self.grid, carrier);
                for ((&shift, &weight), sample) in self
                    .acceptance
                    .shifts
                    .iter()
                    .zip(&self.acceptance.weights)
                    .zip(&arm.sample_nodes)
                {
                    let d = translated(&arm.delay_spectrum, &self.grid, tau_rel - shift);
                    for ((o, d), s) in sfg.samples.iter_mut().zip(&d.samples).zip(&sample.samples) {
                        *o += weight * d * s;
                    }
                }
                to_spectrum(&sfg)
            })
            .collect())
    }

    fn raw_power(&self, tau_rel: f64) -> Result<f64> {
        let spectra = self.sfg_spectra(tau_rel)?;
        let total: f64 = spectra
            .iter()
            .map(|s| {
                s.samples
                    .iter()
                    .zip(&self.filter_power)
                    .map(|(z, f)| z.norm_sqr() * f)
                    .sum::<f64>()
            })
            .sum();
        Ok(total * self.d_omega / (2.0 * PI) / spectra.len() as f64)
    }

    /// Normalised detected signal at absolute stage delay `tau`, background included.
    pub fn signal(&self, tau: f64) -> Result<f64> {
        Ok(self.raw_power(tau - self.frame_offset_fs)? * self.scale + self.background)
    }

    /// Normalised SFG power spectral density at stage delay `tau`, no filter.
    pub fn spectrum(&self, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let spectra = self.sfg_spectra(tau - self.frame_offset_fs)?;
        let grid = spectra[0].grid;
        let omega = (0..grid.n_points()).map(|k| grid.omega(k)).collect();
        let mut psd = vec![0.0; grid.n_points()];
        for s in &spectra {
            for (p, z) in psd.iter_mut().zip(&s.samples) {
                *p += z.norm_sqr() * self.scale / spectra.len() as f64;
            }
        }
        Ok((omega, psd))
    }
}

/// Detected CPI signal over a stage scan.
pub fn cpi_interferogram(setup: &OpticalSetup, scan: &ScanSpec) -> Result<Interferogram> {
    let positions = scan.positions()?;
    let engine = CpiEngine::new(setup)?;
    let signal = positions
        .par_iter()
        .map(|&x| engine.signal(stage_to_delay(x)))
        .collect::<Result<Vec<f64>>>()?;
    Interferogram::new(positions, signal, TraceKind::CpiDip)
}

/// Wavelength window and resolution of a spectrum map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapWindow {
    pub min_wavelength_nm: f64,
    pub max_wavelength_nm: f64,
    pub resolution_nm: f64,
}

/// Unfiltered SFG spectrum against stage position, averaged into wavelength bins.
pub fn sfg_spectrum_map(setup: &OpticalSetup, scan: &ScanSpec, window: &MapWindow) -> Result<SpectrumMap> {
    let positions = scan.positions()?;
    let bins = ScanSpec::new(window.min_wavelength_nm, window.max_wavelength_nm, window.resolution_nm)
        .positions()
        .map_err(|_| Error::InvalidArgument("spectrum-map window is empty".into()))?;
    let engine = CpiEngine::new(setup)?;
    let half = 0.5 * window.resolution_nm;
    let power = positions
        .par_iter()
        .map(|&x| {
            let (omega, psd) = engine.spectrum(stage_to_delay(x))?;
            let mut sum = vec![0.0; bins.len()];
            let mut count = vec![0usize; bins.len()];
            for (w, p) in omega.iter().zip(&psd) {
                let l = wavelength_nm(*w);
                let j = ((l - (window.min_wavelength_nm - half)) / window.resolution_nm).floor();
                if j >= 0.0 && (j as usize) < bins.len() {
                    sum[j as usize] += p;
                    count[j as usize] += 1;
                }
            }
            if count.contains(&0) {
                return Err(Error::InvalidArgument(
                    "spectrum-map resolution is finer than the frequency grid or outside the band".into(),
                ));
            }
            Ok(sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SpectrumMap {
        stage_positions: positions,
        wavelengths: bins,
        power,
    })
}

/// One entry of a loss sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossPoint {
    pub transmission: f64,
    pub fit: FitResult,
}

/// Fitted CPI visibility for each sample transmission.
pub fn loss_sweep(setup: &OpticalSetup, scan: &ScanSpec, transmissions: &[f64]) -> Result<Vec<LossPoint>> {
    for &eta in transmissions {
        check_transmission(eta)?;
    }
    transmissions
        .iter()
        .map(|&eta| {
            let mut s = setup.clone();
            s.transmission = eta;
            let trace = cpi_interferogram(&s, scan)?;
            let fit = fit_gaussian_dip(&trace.stage_positions, &trace.signal)?;
            Ok(LossPoint { transmission: eta, fit })
        })
        .collect()
}
