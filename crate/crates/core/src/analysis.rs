//! Trace analysis: dip fitting, visibilities and fringe envelopes.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::units::{stage_to_delay, FWHM_PER_SIGMA};

/// Fraction of the trace at each end used to estimate the baseline.
pub const BASELINE_FRACTION: f64 = 0.1;
/// Fraction of the trace at each end ignored when reading a Hilbert envelope.
pub const ENVELOPE_EDGE_FRACTION: f64 = 0.05;
/// Minimum number of samples per fringe for envelope estimation.
pub const MIN_SAMPLES_PER_FRINGE: f64 = 8.0;

const MIN_FIT_POINTS: usize = 10;
const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;

/// Full width at half maximum of a single-peaked trace, by linear interpolation
/// at the outermost half-maximum crossings. `None` if a crossing is missing.
pub fn half_maximum_width(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lo, hi) = half_maximum_crossings(x, y)?;
    Some(hi - lo)
}

fn half_maximum_crossings(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let (peak, &max) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(max > 0.0) {
        return None;
    }
    let half = 0.5 * max;
    let first = y.iter().position(|&v| v >= half)?;
    let last = y.iter().rposition(|&v| v >= half)?;
    if first == 0 || last == y.len() - 1 || first > peak || last < peak {
        return None;
    }
    let interp = |i: usize, j: usize| {
        let t = (half - y[i]) / (y[j] - y[i]);
        x[i] + t * (x[j] - x[i])
    };
    Some((interp(first - 1, first), interp(last + 1, last)))
}

/// Subtracts a constant detector bias, clamping negative results to zero.
/// Returns the corrected trace and the number of clamped samples.
pub fn subtract_bias(signal: &[f64], bias: f64) -> (Vec<f64>, usize) {
    let mut clamped = 0;
    let out = signal
        .iter()
        .map(|&v| {
            let c = v - bias;
            if c < 0.0 {
                clamped += 1;
                0.0
            } else {
                c
            }
        })
        .collect();
    (out, clamped)
}

/// Mean of the outer `BASELINE_FRACTION` of points on each side.
pub fn baseline(signal: &[f64]) -> Result<f64> {
    if signal.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints(signal.len()));
    }
    let edge = ((signal.len() as f64 * BASELINE_FRACTION).round() as usize).max(1);
    let n = signal.len();
    let sum: f64 = signal[..edge].iter().chain(&signal[n - edge..]).sum();
    Ok(sum / (2 * edge) as f64)
}

/// Dip visibility `(B − min)/B` with `B` the edge baseline.
pub fn dip_visibility(signal: &[f64]) -> Result<f64> {
    let b = baseline(signal)?;
    if b == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    let min = signal.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= b {
        return Err(Error::NoDip);
    }
    Ok((b - min) / b)
}

/// Result of fitting `B·[1 − V·exp(−(x − x₀)²/2w²)]` to a dip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub visibility: f64,
    pub centre_um: f64,
    pub fwhm_um: f64,
    /// Dip width converted to optical delay (round trip over the stage).
    pub fwhm_fs: f64,
    pub baseline: f64,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn gaussian_dip(p: &[f64; 4], x: f64) -> f64 {
    let [b, v, x0, w] = *p;
    let u = (x - x0) / w;
    b * (1.0 - v * (-0.5 * u * u).exp())
}

fn cost(p: &[f64; 4], x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - gaussian_dip(p, xi)).powi(2))
        .sum()
}

/// Solves a 4×4 linear system by Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (v, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Least-squares Gaussian dip fit (Levenberg–Marquardt) on stage positions in μm.
pub fn fit_gaussian_dip(positions_um: &[f64], signal: &[f64]) -> Result<FitResult> {
    if positions_um.len() != signal.len() {
        return Err(Error::LengthMismatch {
            expected: positions_um.len(),
            actual: signal.len(),
        });
    }
    let b0 = baseline(signal)?;
    if b0 == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    let (imin, &ymin) = signal
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::DegenerateScan)?;
    if ymin >= b0 {
        return Err(Error::NoDip);
    }

    // work in coordinates centred on the scan for conditioning
    let origin = positions_um[positions_um.len() / 2];
    let x: Vec<f64> = positions_um.iter().map(|p| p - origin).collect();
    let depth: Vec<f64> = signal.iter().map(|s| b0 - s).collect();
    let range = (x[x.len() - 1] - x[0]).abs();
    let w0 = half_maximum_width(&x, &depth)
        .map(|f| f / FWHM_PER_SIGMA)
        .filter(|w| *w > 0.0)
        .unwrap_or(range / 10.0);
    let mut p = [b0, (b0 - ymin) / b0, x[imin], w0];
    let mut current = cost(&p, &x, signal);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        let [b, v, x0, w] = p;
        for (&xi, &yi) in x.iter().zip(signal) {
            let d = xi - x0;
            let g = (-0.5 * d * d / (w * w)).exp();
            let r = yi - b * (1.0 - v * g);
            let j = [
                1.0 - v * g,
                -b * g,
                -b * v * g * d / (w * w),
                -b * v * g * d * d / (w * w * w),
            ];
            for r_ in 0..4 {
                jtr[r_] += j[r_] * r;
                for c in 0..4 {
                    jtj[r_][c] += j[r_] * j[c];
                }
            }
        }
        let scales = [b.abs(), v.abs().max(1e-3), w.abs(), w.abs()];
        loop {
            let mut a = jtj;
            for i in 0..4 {
                a[i][i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve4(a, jtr) else {
                lambda *= 10.0;
                if lambda > 1e30 {
                    break;
                }
                continue;
            };
            let small = step.iter().zip(&scales).all(|(s, sc)| s.abs() <= STEP_TOLERANCE * sc);
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let trial_cost = cost(&trial, &x, signal);
            if trial_cost <= current && trial[3] != 0.0 {
                p = trial;
                current = trial_cost;
                lambda = (lambda * 0.1).max(1e-12);
                converged = small;
                break;
            }
            if small {
                converged = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e30 {
                break;
            }
        }
        if converged || lambda > 1e30 {
            break;
        }
    }

    let w = p[3].abs();
    let fwhm_um = FWHM_PER_SIGMA * w;
    Ok(FitResult {
        visibility: p[1],
        centre_um: p[2] + origin,
        fwhm_um,
        fwhm_fs: stage_to_delay(fwhm_um),
        baseline: p[0],
        residual_rms: (current / signal.len() as f64).sqrt(),
        converged,
        iterations,
    })
}

/// Magnitude of the analytic signal of `signal` with its mean removed.
pub fn hilbert_envelope(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    // keep DC and Nyquist, double positive frequencies, drop negative ones
    for (k, z) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            continue;
        }
        if k < n.div_ceil(2) {
            *z *= 2.0;
        } else {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.norm() / n as f64).collect()
}

/// Width and centre of an envelope after discarding the trace edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeShape {
    pub fwhm: f64,
    /// Centroid of the envelope over its half-maximum region.
    pub centre: f64,
    pub peak: f64,
}

pub fn envelope_shape(x: &[f64], envelope: &[f64]) -> Result<EnvelopeShape> {
    if x.len() != envelope.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: envelope.len(),
        });
    }
    let n = x.len();
    let edge = (n as f64 * ENVELOPE_EDGE_FRACTION).round() as usize;
    if n < MIN_FIT_POINTS || n <= 2 * edge + 2 {
        return Err(Error::TooFewPoints(n));
    }
    let xs = &x[edge..n - edge];
    let ys = &envelope[edge..n - edge];
    let peak = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::NoDip);
    }
    let half = 0.5 * peak;
    let mut lobes = 0;
    let mut above = false;
    for &y in ys {
        if y >= half && !above {
            lobes += 1;
        }
        above = y >= half;
    }
    if lobes > 1 {
        return Err(Error::AmbiguousEnvelope);
    }
    let (lo, hi) = half_maximum_crossings(xs, ys).ok_or(Error::AmbiguousEnvelope)?;
    let (num, den) = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y >= half)
        .fold((0.0, 0.0), |(n, d), (&x, &y)| (n + x * y, d + y));
    Ok(EnvelopeShape {
        fwhm: hi - lo,
        centre: num / den,
        peak,
    })
}

/// Fringe visibility `envelope peak / baseline` of a white-light trace.
///
/// `step_um` is the stage step and `wavelength_nm` the shortest relevant
/// wavelength; the fringe period on the stage is half the wavelength.
pub fn fringe_visibility(signal: &[f64], step_um: f64, wavelength_nm: f64) -> Result<f64> {
    check_fringe_sampling(step_um, wavelength_nm)?;
    let b = baseline(signal)?;
    if b == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    let env = hilbert_envelope(signal);
    let n = env.len();
    let edge = (n as f64 * ENVELOPE_EDGE_FRACTION).round() as usize;
    let peak = env[edge..n - edge].iter().copied().fold(0.0, f64::max);
    Ok(peak / b)
}

pub fn samples_per_fringe(step_um: f64, wavelength_nm: f64) -> f64 {
    wavelength_nm / 2000.0 / step_um.abs()
}

pub fn check_fringe_sampling(step_um: f64, wavelength_nm: f64) -> Result<()> {
    let s = samples_per_fringe(step_um, wavelength_nm);
    if s < MIN_SAMPLES_PER_FRINGE {
        return Err(Error::Undersampled { samples_per_fringe: s });
    }
    Ok(())
}
