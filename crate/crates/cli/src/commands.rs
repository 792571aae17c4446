use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use cpi_core::analysis::{
    dip_visibility, envelope_shape, fit_gaussian_dip, fringe_visibility, hilbert_envelope, subtract_bias, FitResult,
};
use cpi_core::config::{ExperimentConfig, ScanConfig, DEFAULT_WLI_STEP_UM};
use cpi_core::cpi::{self, OpticalSetup};
use cpi_core::csvio::{read_trace, write_group_delay, write_loss_sweep, write_map, write_trace};
use cpi_core::hom;
use cpi_core::material::{MaterialLibrary, SampleStack};
use cpi_core::scan::{Interferogram, ScanSpec, TraceKind};
use cpi_core::units::{delay_to_stage, wavelength_nm};
use cpi_core::wli::wli_interferogram;
use cpi_core::Error;
use serde_json::{json, Value};

use crate::plot::{write_script, PlotKind};
use crate::{Failure, RunArgs};

type Outcome = Result<Value, Failure>;

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn fit_json(fit: &FitResult) -> Value {
    json!({
        "visibility": fit.visibility,
        "centre_um": fit.centre_um,
        "fwhm_um": fit.fwhm_um,
        "fwhm_fs": fit.fwhm_fs,
        "baseline": fit.baseline,
        "residual_rms": fit.residual_rms,
        "converged": fit.converged,
        "iterations": fit.iterations,
    })
}

fn finish(summary: Value, converged: bool) -> Outcome {
    if converged {
        Ok(summary)
    } else {
        Err(Failure::NotConverged(summary))
    }
}

fn write_trace_file(trace: &Interferogram, out: &Path, gnuplot: bool) -> Result<(), Error> {
    write_trace(create(out)?, trace)?;
    if gnuplot {
        write_script(out, PlotKind::Trace(trace.kind))?;
    }
    Ok(())
}

/// Fits a recorded dip both as recorded and after removing the detector bias.
fn dip_report(trace: &Interferogram, bias: f64) -> Result<(Value, bool), Error> {
    let raw = fit_gaussian_dip(&trace.stage_positions, &trace.signal)?;
    let mut converged = raw.converged;
    let mut summary = json!({
        "points": trace.len(),
        "fit": fit_json(&raw),
        "min_over_baseline_visibility": dip_visibility(&trace.signal)?,
    });
    if bias != 0.0 {
        let (corrected, clamped) = subtract_bias(&trace.signal, bias);
        let fit = fit_gaussian_dip(&trace.stage_positions, &corrected)?;
        converged &= fit.converged;
        summary["bias"] = json!(bias);
        summary["bias_corrected_fit"] = fit_json(&fit);
        summary["clamped_samples"] = json!(clamped);
    }
    Ok((summary, converged))
}

fn load(args: &RunArgs, lib: &MaterialLibrary) -> Result<ExperimentConfig, Error> {
    ExperimentConfig::load(&args.config, lib)
}

pub fn cpi_dip(args: &RunArgs, lib: &MaterialLibrary) -> Outcome {
    let cfg = load(args, lib)?;
    let setup = &cfg.setup;
    let scan = cfg.scan.resolve(setup)?;
    let mut trace = cpi::cpi_interferogram(setup, &scan)?;
    // the detector reading carries its electronic offset
    let bias = setup.detector.bias;
    trace.signal.iter_mut().for_each(|s| *s += bias);
    write_trace_file(&trace, &args.out, args.gnuplot)?;
    let (mut summary, converged) = dip_report(&trace, bias)?;
    summary["command"] = json!("cpi-dip");
    summary["predicted_centre_um"] = json!(setup.predicted_dip_position_um()?);
    finish(summary, converged)
}

pub fn hom_dip(args: &RunArgs, lib: &MaterialLibrary) -> Outcome {
    let cfg = load(args, lib)?;
    let scan = cfg.scan.resolve(&cfg.setup)?;
    let (spectrum, sample) = cfg.setup.hom_equivalent()?;
    let trace = hom::hom_dip(&spectrum, &sample, &scan)?;
    write_trace_file(&trace, &args.out, args.gnuplot)?;
    let (mut summary, converged) = dip_report(&trace, 0.0)?;
    summary["command"] = json!("hom-dip");
    summary["predicted_centre_um"] = json!(delay_to_stage(sample.group_delay()?));
    finish(summary, converged)
}

/// The white-light scan: `[wli_scan]` if given, otherwise the `[scan]` range
/// at a fringe-resolving step.
fn wli_scan(cfg: &ExperimentConfig) -> ScanConfig {
    cfg.wli_scan.unwrap_or(ScanConfig {
        scan: ScanSpec {
            step_um: DEFAULT_WLI_STEP_UM,
            ..cfg.scan.scan
        },
        follow_sample: cfg.scan.follow_sample,
    })
}

fn wli_summary(setup: &OpticalSetup, trace: &Interferogram) -> Result<Value, Error> {
    let envelope = hilbert_envelope(&trace.signal);
    let shape = envelope_shape(&trace.delays, &envelope)?;
    let centre_nm = setup.laser.centre_wavelength_nm;
    Ok(json!({
        "points": trace.len(),
        "envelope_fwhm_fs": shape.fwhm,
        "envelope_fwhm_um": delay_to_stage(shape.fwhm),
        "envelope_centre_um": delay_to_stage(shape.centre),
        "fringe_visibility": fringe_visibility(&trace.signal, trace.step_um(), centre_nm)?,
    }))
}

pub fn wli(args: &RunArgs, lib: &MaterialLibrary) -> Outcome {
    let cfg = load(args, lib)?;
    let scan = wli_scan(&cfg).resolve(&cfg.setup)?;
    let mut trace = wli_interferogram(&cfg.setup, &scan)?;
    let bias = cfg.setup.detector.bias;
    trace.signal.iter_mut().for_each(|s| *s += bias);
    write_trace_file(&trace, &args.out, args.gnuplot)?;
    let corrected = trace.with_signal(subtract_bias(&trace.signal, bias).0)?;
    let mut summary = wli_summary(&cfg.setup, &corrected)?;
    summary["command"] = json!("wli");
    Ok(summary)
}

pub fn spectrum_map(args: &RunArgs, lib: &MaterialLibrary) -> Outcome {
    let cfg = load(args, lib)?;
    let map_cfg = cfg
        .spectrum_map
        .as_ref()
        .ok_or_else(|| Error::Config("spectrum-map needs a [spectrum_map] section".into()))?;
    let scan = map_cfg.scan.resolve(&cfg.setup)?;
    let map = cpi::sfg_spectrum_map(&cfg.setup, &scan, &map_cfg.window)?;
    write_map(create(&args.out)?, &map)?;
    if args.gnuplot {
        write_script(&args.out, PlotKind::Map)?;
    }
    let peak = map.power.iter().flatten().copied().fold(0.0, f64::max);
    Ok(json!({
        "command": "spectrum-map",
        "stage_positions": map.stage_positions.len(),
        "wavelength_bins": map.wavelengths.len(),
        "peak_power": peak,
    }))
}

pub fn loss_sweep(args: &RunArgs, lib: &MaterialLibrary) -> Outcome {
    let cfg = load(args, lib)?;
    let etas = cfg
        .loss_transmissions
        .as_ref()
        .ok_or_else(|| Error::Config("loss-sweep needs a [loss] section".into()))?;
    let scan = cfg.scan.resolve(&cfg.setup)?;
    let points = cpi::loss_sweep(&cfg.setup, &scan, etas)?;
    write_loss_sweep(create(&args.out)?, &points)?;
    if args.gnuplot {
        write_script(&args.out, PlotKind::Loss)?;
    }
    let mut rows = Vec::with_capacity(points.len());
    for p in &points {
        let mut row = json!({"transmission": p.transmission, "cpi_visibility": p.fit.visibility});
        if cfg.wli_scan.is_some() {
            let mut setup = cfg.setup.clone();
            setup.transmission = p.transmission;
            let trace = wli_interferogram(&setup, &wli_scan(&cfg).resolve(&setup)?)?;
            row["wli_visibility"] = json!(fringe_visibility(
                &trace.signal,
                trace.step_um(),
                setup.laser.centre_wavelength_nm
            )?);
        }
        rows.push(row);
    }
    let converged = points.iter().all(|p| p.fit.converged);
    finish(json!({"command": "loss-sweep", "points": rows}), converged)
}

pub fn fit(input: &Path, bias: f64, out: Option<&Path>, gnuplot: bool) -> Outcome {
    let file = File::open(input).map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
    let trace = read_trace(file, TraceKind::CpiDip)?;
    if let Some(out) = out {
        let corrected = trace.with_signal(subtract_bias(&trace.signal, bias).0)?;
        write_trace_file(&corrected, out, gnuplot)?;
    }
    let (mut summary, converged) = dip_report(&trace, bias)?;
    summary["command"] = json!("fit");
    finish(summary, converged)
}

pub fn group_delay(config: &Path, out: Option<&Path>, gnuplot: bool, lib: &MaterialLibrary) -> Outcome {
    let cfg = ExperimentConfig::load(config, lib)?;
    let setup = &cfg.setup;
    let omega = setup.effective_centre_omega();
    let mut layers = vec![];
    for layer in &setup.sample.layers {
        let single = SampleStack::single(layer.material.clone(), layer.thickness_mm)?;
        layers.push(json!({
            "material": layer.material.name,
            "thickness_mm": layer.thickness_mm,
            "group_delay_fs": single.group_delay(omega)?,
            "excess_group_path_mm": single.excess_group_path_mm(omega)?,
            "beta_fs2": single.gvd(omega)?,
        }));
    }
    let total = if setup.sample.is_empty() {
        0.0
    } else {
        setup.sample.group_delay(omega)?
    };
    if let Some(out) = out {
        write_group_delay(create(out)?, &group_delay_curve(setup)?)?;
        if gnuplot {
            write_script(out, PlotKind::GroupDelay)?;
        }
    }
    Ok(json!({
        "command": "group-delay",
        "centre_wavelength_nm": wavelength_nm(omega),
        "layers": layers,
        "group_delay_fs": total,
        "predicted_centre_um": setup.predicted_dip_position_um()?,
    }))
}

/// `(wavelength_nm, group_delay_fs, stage_position_um)` across ±2 bandwidths of
/// the chirped spectrum about the effective centre.
fn group_delay_curve(setup: &OpticalSetup) -> Result<Vec<[f64; 3]>, Error> {
    let centre = setup.effective_centre_omega();
    let width = setup.chirped.angular_bandwidth(setup.laser.centre_wavelength_nm);
    let n = 81;
    (0..n)
        .map(|i| {
            let w = centre + width * (4.0 * i as f64 / (n - 1) as f64 - 2.0);
            let gd = if setup.sample.is_empty() {
                0.0
            } else {
                setup.sample.group_delay(w)?
            };
            Ok([wavelength_nm(w), gd, delay_to_stage(gd)])
        })
        .collect()
}
