//! Uniform time and frequency grids, complex envelope fields, and the
//! transform pair between them.
//!
//! Fields are complex analytic envelopes about a tracked carrier. The full
//! field is `E(t) = envelope(t)·exp(−i·carrier·t)` and the spectral amplitude
//! is `E(Ω) = ∫ envelope(t)·exp(+iΩt) dt` with `Ω = ω − carrier`, so a spectral
//! phase `Ω·τ` delays the envelope by `τ`.
//!
//! Time samples sit at `t_n = (n − N/2)·dt` and detunings at
//! `Ω_k = (k − N/2)·dΩ`, with `dΩ·dt·N = 2π`.

use std::cell::RefCell;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n_points: usize,
    dt: f64,
    t0: f64,
}

impl TimeGrid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Time of the first sample.
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn span(&self) -> f64 {
        self.n_points as f64 * self.dt
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t0 + index as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.time(i))
    }

    /// Largest envelope shift that is accepted by [`crate::elements::delay_field`].
    pub fn guard_band(&self) -> f64 {
        self.span() / 4.0
    }

    /// The frequency grid paired with this time grid, about `carrier`.
    pub fn frequency_grid(&self, carrier: f64) -> FrequencyGrid {
        FrequencyGrid {
            n_points: self.n_points,
            d_omega: 2.0 * PI / self.span(),
            omega_offset: carrier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    n_points: usize,
    d_omega: f64,
    omega_offset: f64,
}

impl FrequencyGrid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    /// Carrier angular frequency the detuning axis is measured from.
    pub fn omega_offset(&self) -> f64 {
        self.omega_offset
    }

    pub fn detuning(&self, index: usize) -> f64 {
        (index as f64 - (self.n_points / 2) as f64) * self.d_omega
    }

    pub fn detunings(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.detuning(k))
    }

    pub fn omega(&self, index: usize) -> f64 {
        self.omega_offset + self.detuning(index)
    }

    /// Lowest and highest absolute angular frequency on the grid.
    pub fn band(&self) -> (f64, f64) {
        (self.omega(0), self.omega(self.n_points - 1))
    }

    pub fn contains(&self, omega: f64) -> bool {
        let (lo, hi) = self.band();
        omega >= lo && omega <= hi
    }

    /// The time grid paired with this frequency grid.
    pub fn time_grid(&self) -> TimeGrid {
        let dt = 2.0 * PI / (self.n_points as f64 * self.d_omega);
        TimeGrid {
            n_points: self.n_points,
            dt,
            t0: -((self.n_points / 2) as f64) * dt,
        }
    }

    fn pairs_with(&self, grid: &TimeGrid) -> bool {
        self.n_points == grid.n_points
            && ((self.d_omega * grid.dt * self.n_points as f64) / (2.0 * PI) - 1.0).abs() < 1e-12
    }
}

/// Paired time and frequency grids sharing one carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grids {
    pub time: TimeGrid,
    pub frequency: FrequencyGrid,
}

impl Grids {
    pub fn carrier(&self) -> f64 {
        self.frequency.omega_offset
    }
}

/// Builds paired grids spanning `span_fs` with `n_points` samples about `carrier`.
pub fn make_grids(span_fs: f64, n_points: usize, carrier: f64) -> Result<Grids> {
    if n_points < 2 || !n_points.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "n_points must be a power of two ≥ 2, got {n_points}"
        )));
    }
    if !(span_fs > 0.0) || !span_fs.is_finite() {
        return Err(Error::InvalidGrid(format!("span must be positive, got {span_fs}")));
    }
    if !(carrier > 0.0) || !carrier.is_finite() {
        return Err(Error::InvalidGrid(format!("carrier must be positive, got {carrier}")));
    }
    let dt = span_fs / n_points as f64;
    let time = TimeGrid {
        n_points,
        dt,
        t0: -((n_points / 2) as f64) * dt,
    };
    Ok(Grids {
        time,
        frequency: time.frequency_grid(carrier),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalField {
    pub grid: TimeGrid,
    /// Carrier angular frequency, rad/fs.
    pub carrier: f64,
    pub samples: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: FrequencyGrid,
    pub samples: Vec<Complex64>,
}

impl TemporalField {
    pub fn zeros(grid: TimeGrid, carrier: f64) -> Self {
        TemporalField {
            grid,
            carrier,
            samples: vec![Complex64::new(0.0, 0.0); grid.n_points],
        }
    }

    /// Σ|E|²·dt
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dt
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TemporalField {
            grid: self.grid,
            carrier: self.carrier,
            samples: self.samples.iter().map(|z| z * factor).collect(),
        }
    }

    pub(crate) fn matches(&self, other: &TemporalField) -> bool {
        self.grid == other.grid && self.carrier == other.carrier
    }
}

impl SpectralField {
    /// Σ|E|²·dΩ/2π
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.d_omega / (2.0 * PI)
    }

    pub fn power_spectrum(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }
}

// (−1)^k, and (−1)^(N/2) for the half-grid offset of both axes.
fn alternating(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn half_grid_sign(n: usize) -> f64 {
    alternating(n / 2)
}

/// Envelope spectrum of `field`: `E(Ω_k) = dt·Σ_n E(t_n)·exp(iΩ_k t_n)`.
pub fn to_spectrum(field: &TemporalField) -> SpectralField {
    let n = field.grid.n_points;
    let mut buf: Vec<Complex64> = field
        .samples
        .iter()
        .enumerate()
        .map(|(i, z)| z * alternating(i))
        .collect();
    plan(n, FftDirection::Inverse).process(&mut buf);
    let scale = field.grid.dt * half_grid_sign(n);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= scale * alternating(k);
    }
    SpectralField {
        grid: field.grid.frequency_grid(field.carrier),
        samples: buf,
    }
}

/// Inverse of [`to_spectrum`] onto `grid`, which must pair with the spectrum's grid.
pub fn from_spectrum(spectrum: &SpectralField, grid: &TimeGrid) -> Result<TemporalField> {
    if !spectrum.grid.pairs_with(grid) || spectrum.samples.len() != grid.n_points {
        return Err(Error::GridMismatch);
    }
    Ok(from_spectrum_unchecked(spectrum, grid))
}

pub(crate) fn from_spectrum_unchecked(spectrum: &SpectralField, grid: &TimeGrid) -> TemporalField {
    let n = grid.n_points;
    let mut buf: Vec<Complex64> = spectrum
        .samples
        .iter()
        .enumerate()
        .map(|(k, z)| z * alternating(k))
        .collect();
    plan(n, FftDirection::Forward).process(&mut buf);
    let scale = spectrum.grid.d_omega / (2.0 * PI) * half_grid_sign(n);
    for (i, z) in buf.iter_mut().enumerate() {
        *z *= scale * alternating(i);
    }
    TemporalField {
        grid: *grid,
        carrier: spectrum.grid.omega_offset,
        samples: buf,
    }
}

/// Transform-limited Gaussian pulse centred at t = 0 with the given intensity
/// FWHM and total energy.
pub fn gaussian_pulse(grids: &Grids, fwhm_duration: f64, energy: f64) -> Result<TemporalField> {
    let dt = grids.time.dt;
    if !(fwhm_duration > 4.0 * dt) {
        return Err(Error::Unresolvable {
            fwhm_fs: fwhm_duration,
            dt_fs: dt,
        });
    }
    if !(energy >= 0.0) {
        return Err(Error::InvalidArgument(format!("energy must be ≥ 0, got {energy}")));
    }
    // intensity exp(−4 ln2 t²/T²) → amplitude exp(−2 ln2 t²/T²)
    let k = 2.0 * LN_2 / (fwhm_duration * fwhm_duration);
    let mut samples: Vec<Complex64> = grids
        .time
        .times()
        .map(|t| Complex64::new((-k * t * t).exp(), 0.0))
        .collect();
    let raw: f64 = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt;
    let scale = (energy / raw).sqrt();
    for z in &mut samples {
        *z *= scale;
    }
    Ok(TemporalField {
        grid: grids.time,
        carrier: grids.carrier(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::half_maximum_width;
    use crate::units::{angular_frequency, GAUSSIAN_TBP_ANGULAR};
    use proptest::prelude::*;

    fn default_grids() -> Grids {
        make_grids(400_000.0, 1 << 15, 2.385).unwrap()
    }

    #[test]
    fn grid_relations() {
        let g = default_grids();
        assert!((g.time.dt() - 12.207).abs() < 1e-3);
        assert!((g.frequency.d_omega() - 1.5708e-5).abs() < 1e-8);
        assert_eq!(g.time.span(), 400_000.0);
        let product = g.frequency.d_omega() * g.time.dt() * g.time.n_points() as f64;
        assert!((product - 2.0 * PI).abs() < 1e-12);
        assert_eq!(g.time.time(1 << 14), 0.0);
        assert_eq!(g.frequency.detuning(1 << 14), 0.0);
        assert!(g.frequency.pairs_with(&g.time));
        assert!((g.frequency.time_grid().dt() - g.time.dt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grids(1000.0, 1000, 2.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grids(0.0, 1024, 2.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grids(-5.0, 1024, 2.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grids(100.0, 1024, 0.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn carrier_for_790() {
        let g = make_grids(1000.0, 64, angular_frequency(790.0)).unwrap();
        assert!((g.carrier() - 2.384_37).abs() < 1e-5);
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let g = make_grids(1024.0, 256, 2.0).unwrap();
        let mut f = TemporalField::zeros(g.time, 2.0);
        f.samples[100] = Complex64::new(1.0, 0.0);
        let s = to_spectrum(&f);
        let mags: Vec<f64> = s.samples.iter().map(|z| z.norm()).collect();
        for m in &mags {
            assert!((m - g.time.dt()).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_theorem_sign() {
        // a spectral phase Ω·τ delays the pulse by τ
        let g = make_grids(4096.0, 1024, 2.0).unwrap();
        let p = gaussian_pulse(&g, 60.0, 1.0).unwrap();
        let mut s = to_spectrum(&p);
        let tau = 200.0;
        for (k, z) in s.samples.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, g.frequency.detuning(k) * tau);
        }
        let q = from_spectrum(&s, &g.time).unwrap();
        let peak = q
            .intensity()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((g.time.time(peak) - tau).abs() <= g.time.dt());
    }

    #[test]
    fn gaussian_pulse_properties() {
        let g = default_grids();
        let p = gaussian_pulse(&g, 110.0, 2.5).unwrap();
        assert!((p.energy() - 2.5).abs() < 1e-12);
        let times: Vec<f64> = g.time.times().collect();
        let fwhm = half_maximum_width(&times, &p.intensity()).unwrap();
        assert!((fwhm - 110.0).abs() < g.time.dt(), "{fwhm}");

        let zero = gaussian_pulse(&g, 110.0, 0.0).unwrap();
        assert!(zero.samples.iter().all(|z| z.norm() == 0.0));

        assert!(matches!(gaussian_pulse(&g, 40.0, 1.0), Err(Error::Unresolvable { .. })));
    }

    #[test]
    fn gaussian_spectrum_width() {
        // 110 fs transform-limited → spectral intensity FWHM 4 ln2/110 rad/fs (4.01 THz)
        let g = make_grids(20_000.0, 1 << 12, 2.385).unwrap();
        let p = gaussian_pulse(&g, 110.0, 1.0).unwrap();
        let s = to_spectrum(&p);
        let axis: Vec<f64> = g.frequency.detunings().collect();
        let width = half_maximum_width(&axis, &s.power_spectrum()).unwrap();
        let expected = GAUSSIAN_TBP_ANGULAR / 110.0;
        assert!((width / expected - 1.0).abs() < 1e-3, "{width} vs {expected}");
        assert!(((width / (2.0 * PI)) * 1e3 - 4.01).abs() < 0.01);
    }

    #[test]
    fn pulse_width_within_one_cell_across_range() {
        let g = make_grids(400_000.0, 1 << 15, 2.385).unwrap();
        let times: Vec<f64> = g.time.times().collect();
        for fwhm in [50.0, 73.0, 110.0, 151.0, 200.0] {
            let p = gaussian_pulse(&g, fwhm, 1.0).unwrap();
            let measured = half_maximum_width(&times, &p.intensity()).unwrap();
            assert!((measured - fwhm).abs() <= g.time.dt(), "{fwhm}: {measured}");
        }
    }

    #[test]
    fn mismatched_inverse_is_rejected() {
        let g = make_grids(1024.0, 256, 2.0).unwrap();
        let h = make_grids(2048.0, 256, 2.0).unwrap();
        let s = to_spectrum(&TemporalField::zeros(g.time, 2.0));
        assert!(matches!(from_spectrum(&s, &h.time), Err(Error::GridMismatch)));
    }

    fn random_field() -> impl Strategy<Value = (usize, Vec<(f64, f64)>)> {
        (3u32..10).prop_flat_map(|p| {
            let n = 1usize << p;
            (Just(n), prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n))
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval((n, values) in random_field(), dt in 0.1f64..50.0) {
            let g = make_grids(dt * n as f64, n, 1.7).unwrap();
            let field = TemporalField {
                grid: g.time,
                carrier: 1.7,
                samples: values.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
            };
            let spec = to_spectrum(&field);
            let back = from_spectrum(&spec, &g.time).unwrap();
            let norm: f64 = field.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let err: f64 = field
                .samples
                .iter()
                .zip(&back.samples)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(err <= 1e-12 * norm.max(1e-300));
            let e_t = field.energy();
            let e_w = spec.energy();
            prop_assert!((e_t - e_w).abs() <= 1e-10 * e_t.max(1e-300));
        }
    }
}
