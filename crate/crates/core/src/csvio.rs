//! CSV files for traces, spectrum maps and loss sweeps.
//!
//! Floats are written in Rust's shortest round-trip form, so a trace read back
//! is bit-identical to the one written.

use std::io::{Read, Write};

use crate::cpi::LossPoint;
use crate::error::{Error, Result};
use crate::scan::{Interferogram, SpectrumMap, TraceKind};

pub const TRACE_HEADER: [&str; 3] = ["stage_position_um", "delay_fs", "signal"];
pub const MAP_HEADER: [&str; 3] = ["stage_position_um", "wavelength_nm", "power"];
pub const GROUP_DELAY_HEADER: [&str; 3] = ["wavelength_nm", "group_delay_fs", "stage_position_um"];
pub const LOSS_HEADER: [&str; 5] = ["transmission", "visibility", "fwhm_um", "centre_um", "baseline"];

fn row<W: Write>(w: &mut csv::Writer<W>, values: &[f64]) -> Result<()> {
    w.write_record(values.iter().map(|v| v.to_string()))?;
    Ok(())
}

pub fn write_trace<W: Write>(out: W, trace: &Interferogram) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for i in 0..trace.len() {
        row(&mut w, &[trace.stage_positions[i], trace.delays[i], trace.signal[i]])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace written by [`write_trace`]. Delays are recomputed from positions.
pub fn read_trace<R: Read>(input: R, kind: TraceKind) -> Result<Interferogram> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("CSV has no `{name}` column")))
    };
    let (ix, is) = (column(TRACE_HEADER[0])?, column(TRACE_HEADER[2])?);
    let mut positions = vec![];
    let mut signal = vec![];
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let parse = |i: usize| {
            record
                .get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("CSV row {}: bad number in column {}", line + 2, i + 1)))
        };
        positions.push(parse(ix)?);
        signal.push(parse(is)?);
    }
    Interferogram::new(positions, signal, kind)
}

pub fn write_map<W: Write>(out: W, map: &SpectrumMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MAP_HEADER)?;
    for (x, powers) in map.stage_positions.iter().zip(&map.power) {
        for (l, p) in map.wavelengths.iter().zip(powers) {
            row(&mut w, &[*x, *l, *p])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_loss_sweep<W: Write>(out: W, points: &[LossPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOSS_HEADER)?;
    for p in points {
        row(
            &mut w,
            &[
                p.transmission,
                p.fit.visibility,
                p.fit.fwhm_um,
                p.fit.centre_um,
                p.fit.baseline,
            ],
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_group_delay<W: Write>(out: W, rows: &[[f64; 3]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GROUP_DELAY_HEADER)?;
    for r in rows {
        row(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}
