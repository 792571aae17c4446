//! Experiment configuration files.
//!
//! Configs are TOML with the sections `laser`, `chirp`, `sample`, `filter`,
//! `sfg`, `detector`, `scan`, `wli_scan`, `spectrum_map`, `loss` and `grid`.
//! Physical quantities carry their unit in the key name; unknown keys and
//! keys with the wrong unit suffix are errors.

use std::path::Path;

use serde::Deserialize;

use crate::cpi::{
    ArmSpec, Detector, GridSpec, Laser, MapWindow, OpticalSetup, DEFAULT_GRID_POINTS, DEFAULT_SPAN_FACTOR,
};
use crate::elements::{chirp_for_duration, ChirpSign, ChirpSpec, Filter, FilterShape};
use crate::error::{Error, Result};
use crate::material::{Layer, MaterialLibrary, SampleStack};
use crate::scan::ScanSpec;
use crate::units::bandwidth_to_angular;

/// Default stage step for white-light scans: at least 8 samples per fringe at 790 nm.
pub const DEFAULT_WLI_STEP_UM: f64 = 0.04;

const SECTIONS: &[(&str, &[&str])] = &[
    ("laser", &["centre_wavelength_nm", "pulse_duration_fs"]),
    (
        "chirp",
        &[
            "chirped_duration_ps",
            "chirped_bandwidth_nm",
            "antichirped_duration_ps",
            "antichirped_bandwidth_nm",
            "overlap_offset_fs",
        ],
    ),
    ("sample", &["layers", "transmission"]),
    ("filter", &["centre_wavelength_nm", "bandwidth_nm", "shape"]),
    ("sfg", &["acceptance_bandwidth_nm"]),
    ("detector", &["background", "bias"]),
    ("scan", &["start_um", "stop_um", "step_um", "follow_sample"]),
    ("wli_scan", &["start_um", "stop_um", "step_um", "follow_sample"]),
    (
        "spectrum_map",
        &[
            "start_um",
            "stop_um",
            "step_um",
            "follow_sample",
            "min_wavelength_nm",
            "max_wavelength_nm",
            "resolution_nm",
        ],
    ),
    ("loss", &["transmissions"]),
    ("grid", &["points", "span_factor"]),
];

const LAYER_KEYS: &[&str] = &["material", "thickness_mm"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    laser: RawLaser,
    chirp: RawChirp,
    #[serde(default)]
    sample: RawSample,
    filter: RawFilter,
    #[serde(default)]
    sfg: RawSfg,
    #[serde(default)]
    detector: RawDetector,
    scan: RawScan,
    wli_scan: Option<RawWliScan>,
    spectrum_map: Option<RawMap>,
    loss: Option<RawLoss>,
    #[serde(default)]
    grid: RawGrid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaser {
    centre_wavelength_nm: f64,
    pulse_duration_fs: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChirp {
    chirped_duration_ps: f64,
    chirped_bandwidth_nm: Option<f64>,
    antichirped_duration_ps: Option<f64>,
    antichirped_bandwidth_nm: Option<f64>,
    overlap_offset_fs: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    material: String,
    thickness_mm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    #[serde(default)]
    layers: Vec<RawLayer>,
    #[serde(default = "one")]
    transmission: f64,
}

impl Default for RawSample {
    fn default() -> Self {
        RawSample {
            layers: vec![],
            transmission: 1.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    centre_wavelength_nm: f64,
    bandwidth_nm: f64,
    #[serde(default)]
    shape: FilterShape,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSfg {
    acceptance_bandwidth_nm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    #[serde(default)]
    background: f64,
    #[serde(default)]
    bias: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    start_um: f64,
    stop_um: f64,
    step_um: f64,
    #[serde(default)]
    follow_sample: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWliScan {
    start_um: f64,
    stop_um: f64,
    #[serde(default = "default_wli_step")]
    step_um: f64,
    #[serde(default)]
    follow_sample: bool,
}

fn default_wli_step() -> f64 {
    DEFAULT_WLI_STEP_UM
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    start_um: f64,
    stop_um: f64,
    step_um: f64,
    #[serde(default)]
    follow_sample: bool,
    min_wavelength_nm: f64,
    max_wavelength_nm: f64,
    resolution_nm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoss {
    transmissions: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(default = "default_points")]
    points: usize,
    #[serde(default = "default_span_factor")]
    span_factor: f64,
}

impl Default for RawGrid {
    fn default() -> Self {
        RawGrid {
            points: DEFAULT_GRID_POINTS,
            span_factor: DEFAULT_SPAN_FACTOR,
        }
    }
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_span_factor() -> f64 {
    DEFAULT_SPAN_FACTOR
}

/// A stage scan that may be re-centred on the sample's predicted dip position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub scan: ScanSpec,
    pub follow_sample: bool,
}

impl ScanConfig {
    /// The scan in absolute stage positions for `setup`.
    pub fn resolve(&self, setup: &OpticalSetup) -> Result<ScanSpec> {
        if self.follow_sample {
            Ok(self.scan.shifted(setup.predicted_dip_position_um()?))
        } else {
            Ok(self.scan)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    pub scan: ScanConfig,
    pub window: MapWindow,
}

/// Everything a config file specifies.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub setup: OpticalSetup,
    pub scan: ScanConfig,
    pub wli_scan: Option<ScanConfig>,
    pub spectrum_map: Option<MapConfig>,
    pub loss_transmissions: Option<Vec<f64>>,
}

/// Rejects unknown sections and keys, naming the expected key when only the
/// unit suffix differs.
fn check_keys(table: &toml::Table) -> Result<()> {
    for (section, value) in table {
        let Some((_, allowed)) = SECTIONS.iter().find(|(name, _)| name == section) else {
            return Err(Error::Config(format!("unknown section [{section}]")));
        };
        let toml::Value::Table(entries) = value else {
            return Err(Error::Config(format!("[{section}] must be a table")));
        };
        check_table_keys(section, entries, allowed)?;
        if section == "sample" {
            if let Some(toml::Value::Array(layers)) = entries.get("layers") {
                for layer in layers {
                    if let toml::Value::Table(t) = layer {
                        check_table_keys("sample.layers", t, LAYER_KEYS)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn stem(key: &str) -> &str {
    key.rsplit_once('_').map_or(key, |(s, _)| s)
}

fn check_table_keys(section: &str, entries: &toml::Table, allowed: &[&str]) -> Result<()> {
    for key in entries.keys() {
        if allowed.contains(&key.as_str()) {
            continue;
        }
        if let Some(expected) = allowed.iter().find(|a| a.contains('_') && stem(a) == stem(key)) {
            return Err(Error::Config(format!(
                "[{section}] key `{key}` has the wrong unit suffix, expected `{expected}`"
            )));
        }
        return Err(Error::Config(format!("[{section}] unknown key `{key}`")));
    }
    Ok(())
}

fn scan_spec(start: f64, stop: f64, step: f64, what: &str) -> Result<ScanSpec> {
    let s = ScanSpec::new(start, stop, step);
    s.positions()
        .map_err(|_| Error::Config(format!("[{what}] needs start_um ≤ stop_um and step_um > 0")))?;
    Ok(s)
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, materials: &MaterialLibrary) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        check_keys(&table)?;
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::from_raw(raw, materials)
    }

    pub fn load(path: &Path, materials: &MaterialLibrary) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, materials)
    }

    fn from_raw(raw: RawConfig, materials: &MaterialLibrary) -> Result<Self> {
        let laser = Laser {
            centre_wavelength_nm: raw.laser.centre_wavelength_nm,
            pulse_duration_fs: raw.laser.pulse_duration_fs,
        };
        if !(laser.centre_wavelength_nm > 0.0) || !(laser.pulse_duration_fs > 0.0) {
            return Err(Error::Config("[laser] wavelength and duration must be positive".into()));
        }
        let centre = laser.centre_wavelength_nm;
        let c = &raw.chirp;
        let chirped_bw = c.chirped_bandwidth_nm.unwrap_or_else(|| laser.bandwidth_nm());
        let anti_bw = c.antichirped_bandwidth_nm.unwrap_or(chirped_bw);
        let chirped = chirp_for_duration(
            c.chirped_duration_ps * 1000.0,
            bandwidth_to_angular(chirped_bw, centre),
            ChirpSign::Chirped,
        )?;
        // without an explicit duration the anti-chirp matches the chirp rate
        let anti_a = match c.antichirped_duration_ps {
            Some(ps) => {
                chirp_for_duration(
                    ps * 1000.0,
                    bandwidth_to_angular(anti_bw, centre),
                    ChirpSign::AntiChirped,
                )?
                .a_fs2
            }
            None => -chirped.a_fs2,
        };
        let layers = raw
            .sample
            .layers
            .iter()
            .map(|l| {
                Ok(Layer {
                    material: materials.get(&l.material)?,
                    thickness_mm: l.thickness_mm,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut setup = OpticalSetup {
            laser,
            chirped: ArmSpec {
                bandwidth_nm: chirped_bw,
                chirp: chirped,
            },
            antichirped: ArmSpec {
                bandwidth_nm: anti_bw,
                chirp: ChirpSpec {
                    a_fs2: anti_a,
                    overlap_offset_fs: 0.0,
                },
            },
            sample: SampleStack::new(layers)?,
            transmission: raw.sample.transmission,
            filter: Filter {
                centre_wavelength_nm: raw.filter.centre_wavelength_nm,
                bandwidth_nm: raw.filter.bandwidth_nm,
                shape: raw.filter.shape,
            },
            acceptance_nm: raw.sfg.acceptance_bandwidth_nm,
            detector: Detector {
                background: raw.detector.background,
                bias: raw.detector.bias,
            },
            grid: GridSpec {
                points: raw.grid.points,
                span_fs: 0.0,
            },
        };
        setup.fit_grid_span(raw.grid.span_factor);
        match c.overlap_offset_fs {
            Some(offset) => setup.antichirped.chirp.overlap_offset_fs = offset,
            None => setup.tune_overlap(),
        }
        setup.validate()?;
        setup.grids()?;

        let scan = ScanConfig {
            scan: scan_spec(raw.scan.start_um, raw.scan.stop_um, raw.scan.step_um, "scan")?,
            follow_sample: raw.scan.follow_sample,
        };
        let wli_scan = raw
            .wli_scan
            .map(|w| {
                Ok::<_, Error>(ScanConfig {
                    scan: scan_spec(w.start_um, w.stop_um, w.step_um, "wli_scan")?,
                    follow_sample: w.follow_sample,
                })
            })
            .transpose()?;
        let spectrum_map = raw
            .spectrum_map
            .map(|m| {
                if !(m.resolution_nm > 0.0) || m.max_wavelength_nm <= m.min_wavelength_nm {
                    return Err(Error::Config(
                        "[spectrum_map] needs min < max wavelength and a positive resolution".into(),
                    ));
                }
                Ok(MapConfig {
                    scan: ScanConfig {
                        scan: scan_spec(m.start_um, m.stop_um, m.step_um, "spectrum_map")?,
                        follow_sample: m.follow_sample,
                    },
                    window: MapWindow {
                        min_wavelength_nm: m.min_wavelength_nm,
                        max_wavelength_nm: m.max_wavelength_nm,
                        resolution_nm: m.resolution_nm,
                    },
                })
            })
            .transpose()?;
        let loss_transmissions = raw.loss.map(|l| l.transmissions);
        if let Some(list) = &loss_transmissions {
            if list.is_empty() {
                return Err(Error::Config("[loss] transmissions is empty".into()));
            }
            for &eta in list {
                crate::elements::check_transmission(eta)?;
            }
        }
        Ok(ExperimentConfig {
            setup,
            scan,
            wli_scan,
            spectrum_map,
            loss_transmissions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[laser]
centre_wavelength_nm = 790.0
pulse_duration_fs = 110.0

[chirp]
chirped_duration_ps = 51.2
chirped_bandwidth_nm = 10.0
antichirped_bandwidth_nm = 9.0

[filter]
centre_wavelength_nm = 395.9
bandwidth_nm = 0.4

[scan]
start_um = -60.0
stop_um = 60.0
step_um = 1.0
"#;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(text, &MaterialLibrary::builtin())
    }

    #[test]
    fn minimal_config_is_the_paper_setup() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.setup, OpticalSetup::paper());
        assert!(cfg.setup.sample.is_empty());
        assert!(cfg.wli_scan.is_none());
    }

    #[test]
    fn unknown_and_misspelled_keys() {
        let bad = MINIMAL.replace("bandwidth_nm = 0.4", "bandwith_nm = 0.4");
        let err = parse(&bad).unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("unknown key")),
            "{err}"
        );
        let bad = MINIMAL.replace("pulse_duration_fs", "pulse_duration_ps");
        let err = parse(&bad).unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("pulse_duration_fs")),
            "{err}"
        );
        let bad = format!("{MINIMAL}\n[extra]\nx = 1\n");
        assert!(matches!(parse(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn missing_required_key() {
        let bad = MINIMAL.replace("chirped_duration_ps = 51.2\n", "");
        assert!(matches!(parse(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn transmission_out_of_range() {
        let bad = format!("{MINIMAL}\n[sample]\ntransmission = 1.5\n");
        assert!(parse(&bad).unwrap_err().is_config_error());
    }

    #[test]
    fn layers_and_unknown_material() {
        let ok = format!(
            "{MINIMAL}\n[sample]\nlayers = [{{ material = \"calcite_o\", thickness_mm = 80.6 }}, {{ material = \"bk7\", thickness_mm = 28.93 }}]\n"
        );
        let cfg = parse(&ok).unwrap();
        assert_eq!(cfg.setup.sample.layers.len(), 2);
        let bad = ok.replace("bk7", "bk8");
        assert!(matches!(parse(&bad), Err(Error::UnknownMaterial(_))));
        let bad = ok.replace("thickness_mm = 28.93", "thickness_um = 28.93");
        assert!(matches!(parse(&bad), Err(Error::Config(ref m)) if m.contains("thickness_mm")));
    }

    #[test]
    fn explicit_antichirp_duration_and_offset() {
        let text = MINIMAL.replace(
            "antichirped_bandwidth_nm = 9.0",
            "antichirped_bandwidth_nm = 9.0\nantichirped_duration_ps = 45.0\noverlap_offset_fs = -1000.0",
        );
        let cfg = parse(&text).unwrap();
        assert!((cfg.setup.antichirped.chirp.a_fs2 / -8.28e5 - 1.0).abs() < 0.005);
        assert_eq!(cfg.setup.antichirped.chirp.overlap_offset_fs, -1000.0);
    }

    #[test]
    fn follow_sample_recentres_scan() {
        let text = format!(
            "{}\n[sample]\nlayers = [{{ material = \"bk7\", thickness_mm = 10.0 }}]\n",
            MINIMAL.replace("step_um = 1.0", "step_um = 1.0\nfollow_sample = true")
        );
        let cfg = parse(&text).unwrap();
        let scan = cfg.scan.resolve(&cfg.setup).unwrap();
        let x = cfg.setup.predicted_dip_position_um().unwrap();
        assert!((scan.start_um - (x - 60.0)).abs() < 1e-9);
        assert!(x > 2000.0 && x < 3000.0, "{x}");
    }

    #[test]
    fn wli_step_default() {
        let text = format!("{MINIMAL}\n[wli_scan]\nstart_um = -30.0\nstop_um = 30.0\n");
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.wli_scan.unwrap().scan.step_um, DEFAULT_WLI_STEP_UM);
    }
}
