//! Gnuplot scripts that plot the CSV files; nothing is rendered here.

use std::fs;
use std::path::Path;

use cpi_core::scan::TraceKind;
use cpi_core::Error;

#[derive(Debug, Clone, Copy)]
pub enum PlotKind {
    Trace(TraceKind),
    Map,
    Loss,
    GroupDelay,
}

fn body(kind: PlotKind, csv: &str) -> String {
    let prelude = format!("set datafile separator ','\nset key autotitle columnhead\ndata = '{csv}'\n");
    let plot = match kind {
        PlotKind::Trace(k) => {
            let style = if k == TraceKind::WliFringes {
                "lines"
            } else {
                "linespoints pt 7 ps 0.5"
            };
            format!(
                "set xlabel 'stage position (um)'\nset ylabel 'signal'\nset title '{}'\n\
                 plot data using 1:3 with {style}\n",
                k.label()
            )
        }
        // long-form rows have no blank separator lines, so plot as coloured points
        PlotKind::Map => "set xlabel 'stage position (um)'\nset ylabel 'wavelength (nm)'\n\
                          plot data using 1:2:3 with points pt 5 ps 0.4 lc palette notitle\n"
            .to_string(),
        PlotKind::Loss => "set logscale x\nset xlabel 'transmission'\nset ylabel 'visibility'\n\
                           set yrange [0:1.05]\nplot data using 1:2 with linespoints pt 7\n"
            .to_string(),
        PlotKind::GroupDelay => "set xlabel 'wavelength (nm)'\nset ylabel 'group delay (fs)'\n\
                                 plot data using 1:2 with lines\n"
            .to_string(),
    };
    prelude + &plot
}

/// Writes `<csv stem>.gp` next to `csv`.
pub fn write_script(csv: &Path, kind: PlotKind) -> Result<(), Error> {
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    fs::write(csv.with_extension("gp"), body(kind, &name))?;
    Ok(())
}
