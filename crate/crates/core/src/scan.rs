//! Stage scans and the traces recorded over them.

use crate::error::{Error, Result};
use crate::units::stage_to_delay;

/// Uniform stage scan, positions in μm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub start_um: f64,
    pub stop_um: f64,
    pub step_um: f64,
}

impl ScanSpec {
    pub fn new(start_um: f64, stop_um: f64, step_um: f64) -> Self {
        ScanSpec {
            start_um,
            stop_um,
            step_um,
        }
    }

    /// Scan of half-width `half_width_um` centred on `centre_um`.
    pub fn centred(centre_um: f64, half_width_um: f64, step_um: f64) -> Self {
        ScanSpec::new(centre_um - half_width_um, centre_um + half_width_um, step_um)
    }

    pub fn shifted(&self, offset_um: f64) -> Self {
        ScanSpec::new(self.start_um + offset_um, self.stop_um + offset_um, self.step_um)
    }

    pub fn positions(&self) -> Result<Vec<f64>> {
        let values = [self.start_um, self.stop_um, self.step_um];
        if values.iter().any(|v| !v.is_finite()) || !(self.step_um > 0.0) || self.stop_um < self.start_um {
            return Err(Error::DegenerateScan);
        }
        let n = ((self.stop_um - self.start_um) / self.step_um + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| self.start_um + i as f64 * self.step_um).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    CpiDip,
    WliFringes,
    HomDip,
}

impl TraceKind {
    pub fn label(self) -> &'static str {
        match self {
            TraceKind::CpiDip => "cpi-dip",
            TraceKind::WliFringes => "wli-fringes",
            TraceKind::HomDip => "hom-dip",
        }
    }
}

/// A detected signal against stage position.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    pub stage_positions: Vec<f64>,
    /// Round-trip delay `2x/c` for each stage position, fs.
    pub delays: Vec<f64>,
    pub signal: Vec<f64>,
    pub kind: TraceKind,
}

impl Interferogram {
    pub fn new(stage_positions: Vec<f64>, signal: Vec<f64>, kind: TraceKind) -> Result<Self> {
        if stage_positions.len() != signal.len() {
            return Err(Error::LengthMismatch {
                expected: stage_positions.len(),
                actual: signal.len(),
            });
        }
        let delays = stage_positions.iter().map(|&x| stage_to_delay(x)).collect();
        Ok(Interferogram {
            stage_positions,
            delays,
            signal,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    pub fn step_um(&self) -> f64 {
        match self.stage_positions.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    pub fn with_signal(&self, signal: Vec<f64>) -> Result<Self> {
        Interferogram::new(self.stage_positions.clone(), signal, self.kind)
    }
}

/// SFG power against stage position and wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    pub stage_positions: Vec<f64>,
    pub wavelengths: Vec<f64>,
    /// `power[i][j]` at stage position `i` and wavelength `j`.
    pub power: Vec<Vec<f64>>,
}
