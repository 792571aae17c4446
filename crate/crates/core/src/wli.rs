//! White-light interferometer: the chirped pulse is split equally, one half
//! passes the sample, the other the delay stage, and the recombined energy is
//! recorded directly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cpi::{stretched_pulses, OpticalSetup};
use crate::elements::material_phase;
use crate::error::{Error, Result};
use crate::grid::to_spectrum;
use crate::scan::{Interferogram, ScanSpec, TraceKind};
use crate::units::stage_to_delay;

/// Spectral components weaker than this fraction of the peak cross term are skipped.
const NEGLIGIBLE: f64 = 1e-18;

/// Evaluates `I(τ) = ∫|D·e^{iωτ'} + √η·S·e^{i(φ(ω) − ωT)}|² dΩ/2π` with
/// `τ' = τ − T`, where `T` is the sample group delay used as the frame offset.
pub struct WliEngine {
    /// Constant part `∫(|D|² + η|S|²)`.
    dc: f64,
    omega: Vec<f64>,
    /// Cross term `D*·√η·S·e^{i(φ − ωT)}` for the significant components.
    cross: Vec<Complex64>,
    norm: f64,
    frame_offset_fs: f64,
    background: f64,
    guard: f64,
}

impl WliEngine {
    pub fn new(setup: &OpticalSetup) -> Result<Self> {
        setup.validate()?;
        let grids = setup.grids()?;
        let (chirped, _) = stretched_pulses(setup, &grids, 0.0)?;
        let spectrum = to_spectrum(&chirped);
        let frame_offset_fs = setup.sample_group_delay()?;
        let phase = material_phase(&setup.sample, &spectrum.grid)?;
        let eta = setup.transmission;
        let norm = spectrum.grid.d_omega() / (2.0 * PI);
        let mut dc = 0.0;
        let mut omega = Vec::new();
        let mut cross = Vec::new();
        let peak = spectrum.samples.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        for (k, z) in spectrum.samples.iter().enumerate() {
            // equal split: both arms carry z/√2
            let p = 0.5 * z.norm_sqr();
            dc += p * (1.0 + eta);
            if z.norm_sqr() > NEGLIGIBLE * peak {
                let w = spectrum.grid.omega(k);
                omega.push(w);
                cross.push(p * eta.sqrt() * Complex64::from_polar(1.0, phase[k] - w * frame_offset_fs));
            }
        }
        Ok(WliEngine {
            dc,
            omega,
            cross,
            norm,
            frame_offset_fs,
            background: setup.detector.background,
            guard: grids.time.guard_band(),
        })
    }

    pub fn frame_offset_fs(&self) -> f64 {
        self.frame_offset_fs
    }

    /// Detected energy at stage delay `tau`, normalised to the input pulse energy.
    pub fn signal(&self, tau: f64) -> Result<f64> {
        let rel = tau - self.frame_offset_fs;
        if rel.abs() >= self.guard {
            return Err(Error::WrapAround {
                shift_fs: rel,
                guard_fs: self.guard,
            });
        }
        let fringe: f64 = self
            .omega
            .iter()
            .zip(&self.cross)
            .map(|(w, g)| (g * Complex64::from_polar(1.0, -w * rel)).re)
            .sum();
        Ok(((self.dc + 2.0 * fringe) * self.norm).max(0.0) + self.background)
    }
}

pub fn wli_interferogram(setup: &OpticalSetup, scan: &ScanSpec) -> Result<Interferogram> {
    let positions = scan.positions()?;
    let engine = WliEngine::new(setup)?;
    let signal = positions
        .par_iter()
        .map(|&x| engine.signal(stage_to_delay(x)))
        .collect::<Result<Vec<f64>>>()?;
    Interferogram::new(positions, signal, TraceKind::WliFringes)
}
