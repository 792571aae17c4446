//! Material dispersion models and sample stacks.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::units::{angular_frequency, wavelength_nm, C_UM_PER_FS};

/// Step used for finite-difference derivatives of tabulated dispersion, rad/fs.
pub const DERIVATIVE_STEP: f64 = 2e-3;

const UM_PER_MM: f64 = 1000.0;

/// Generalised Sellmeier model, `n² = constant + Σ bᵢλ²/(λ² − cᵢ) − ir·λ²` with λ in μm.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sellmeier {
    #[serde(default = "one")]
    pub constant: f64,
    pub b: Vec<f64>,
    pub c_um2: Vec<f64>,
    #[serde(default)]
    pub ir_um_inv2: f64,
}

fn one() -> f64 {
    1.0
}

impl Sellmeier {
    pub fn index_squared(&self, wavelength_um: f64) -> f64 {
        let l2 = wavelength_um * wavelength_um;
        self.constant
            + self
                .b
                .iter()
                .zip(&self.c_um2)
                .map(|(b, c)| b * l2 / (l2 - c))
                .sum::<f64>()
            - self.ir_um_inv2 * l2
    }

    pub fn refractive_index(&self, wavelength_um: f64) -> f64 {
        self.index_squared(wavelength_um).sqrt()
    }
}

/// Taylor expansion of the excess wavevector about a reference frequency.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Taylor {
    /// First-order coefficient α, fs/mm.
    #[serde(default)]
    pub group_delay_fs_per_mm: f64,
    /// Second-order coefficient β, fs²/mm.
    #[serde(default)]
    pub gvd_fs2_per_mm: f64,
    /// Coefficients of Ω³, Ω⁴, … in fs^k/mm.
    #[serde(default)]
    pub higher_orders: Vec<f64>,
    pub reference_wavelength_nm: f64,
}

impl Taylor {
    pub fn reference_omega(&self) -> f64 {
        angular_frequency(self.reference_wavelength_nm)
    }

    /// All coefficients by order, starting at order 1.
    fn coefficients(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        [self.group_delay_fs_per_mm, self.gvd_fs2_per_mm]
            .into_iter()
            .chain(self.higher_orders.iter().copied())
            .enumerate()
            .map(|(i, c)| (i as i32 + 1, c))
    }

    fn phase_per_mm(&self, detuning: f64) -> f64 {
        self.coefficients().map(|(k, c)| c * detuning.powi(k)).sum()
    }

    /// Odd part φ(Ω) − φ(−Ω) per mm, evaluated from the odd orders only.
    fn odd_difference_per_mm(&self, detuning: f64) -> f64 {
        self.coefficients()
            .filter(|(k, _)| k % 2 == 1)
            .map(|(k, c)| 2.0 * c * detuning.powi(k))
            .sum()
    }

    fn derivative_per_mm(&self, detuning: f64) -> f64 {
        self.coefficients()
            .map(|(k, c)| k as f64 * c * detuning.powi(k - 1))
            .sum()
    }

    fn half_second_derivative_per_mm(&self, detuning: f64) -> f64 {
        self.coefficients()
            .filter(|(k, _)| *k >= 2)
            .map(|(k, c)| 0.5 * (k * (k - 1)) as f64 * c * detuning.powi(k - 2))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum DispersionModel {
    Sellmeier(Sellmeier),
    Taylor(Taylor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub name: String,
    pub model: DispersionModel,
    /// Wavelength range (μm) over which the model may be evaluated.
    pub valid_range_um: Option<(f64, f64)>,
}

impl MaterialSpec {
    pub fn taylor(name: &str, taylor: Taylor) -> Self {
        MaterialSpec {
            name: name.to_string(),
            model: DispersionModel::Taylor(taylor),
            valid_range_um: None,
        }
    }

    /// Excess spectral phase per mm relative to vacuum, `[k(ω) − ω/c]·1 mm`.
    pub fn phase_per_mm(&self, omega: f64) -> f64 {
        match &self.model {
            DispersionModel::Sellmeier(s) => {
                let n = s.refractive_index(2.0 * std::f64::consts::PI * C_UM_PER_FS / omega);
                (n - 1.0) * omega / C_UM_PER_FS * UM_PER_MM
            }
            DispersionModel::Taylor(t) => t.phase_per_mm(omega - t.reference_omega()),
        }
    }

    fn check_range(&self, omega: f64) -> Result<()> {
        if !(omega > 0.0) {
            return Err(Error::OutOfBand {
                what: format!("evaluation of `{}`", self.name),
                wavelength_nm: f64::INFINITY,
            });
        }
        if let Some((lo, hi)) = self.valid_range_um {
            let l = wavelength_nm(omega) / 1000.0;
            if l < lo || l > hi {
                return Err(Error::OutOfBand {
                    what: format!("evaluation of `{}`", self.name),
                    wavelength_nm: l * 1000.0,
                });
            }
        }
        Ok(())
    }

    /// Checks the model can be evaluated over the whole frequency band.
    pub fn validate_band(&self, grid: &FrequencyGrid) -> Result<()> {
        let (w_lo, w_hi) = grid.band();
        match &self.model {
            DispersionModel::Sellmeier(s) => {
                if w_lo <= 0.0 {
                    return Err(Error::InvalidDispersion {
                        material: self.name.clone(),
                        reason: "band reaches zero frequency".into(),
                    });
                }
                let l_short = wavelength_nm(w_hi) / 1000.0;
                let l_long = wavelength_nm(w_lo) / 1000.0;
                for c in &s.c_um2 {
                    let pole = c.abs().sqrt();
                    if *c > 0.0 && pole >= l_short && pole <= l_long {
                        return Err(Error::InvalidDispersion {
                            material: self.name.clone(),
                            reason: format!("Sellmeier pole at {:.1} nm inside band", pole * 1000.0),
                        });
                    }
                }
                for k in 0..grid.n_points() {
                    let n2 = s.index_squared(wavelength_nm(grid.omega(k)) / 1000.0);
                    if !(n2 > 1.0) || !n2.is_finite() {
                        return Err(Error::InvalidDispersion {
                            material: self.name.clone(),
                            reason: format!("n² = {n2} at {:.1} nm", wavelength_nm(grid.omega(k))),
                        });
                    }
                }
                Ok(())
            }
            DispersionModel::Taylor(t) => {
                let w = t.reference_omega();
                if w < w_lo || w > w_hi {
                    return Err(Error::OutOfBand {
                        what: format!("Taylor reference of `{}`", self.name),
                        wavelength_nm: t.reference_wavelength_nm,
                    });
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: MaterialSpec,
    pub thickness_mm: f64,
}

/// Ordered list of layers in the sample arm. An empty stack is vacuum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleStack {
    pub layers: Vec<Layer>,
}

impl SampleStack {
    pub fn vacuum() -> Self {
        SampleStack::default()
    }

    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        for layer in &layers {
            if !(layer.thickness_mm >= 0.0) || !layer.thickness_mm.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "thickness of `{}` must be ≥ 0, got {}",
                    layer.material.name, layer.thickness_mm
                )));
            }
        }
        Ok(SampleStack { layers })
    }

    pub fn single(material: MaterialSpec, thickness_mm: f64) -> Result<Self> {
        Self::new(vec![Layer { material, thickness_mm }])
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Excess phase of the whole stack at absolute frequency `omega`.
    pub fn phase(&self, omega: f64) -> f64 {
        self.layers
            .iter()
            .map(|l| l.material.phase_per_mm(omega) * l.thickness_mm)
            .sum()
    }

    /// Odd part φ(ω₀+Ω) − φ(ω₀−Ω) of the stack phase. Taylor layers centred on
    /// `centre` contribute only their odd orders, so even orders cancel exactly.
    pub fn odd_difference(&self, centre: f64, detuning: f64) -> f64 {
        self.layers
            .iter()
            .map(|l| match &l.material.model {
                DispersionModel::Taylor(t) if t.reference_omega() == centre => {
                    t.odd_difference_per_mm(detuning) * l.thickness_mm
                }
                _ => {
                    (l.material.phase_per_mm(centre + detuning) - l.material.phase_per_mm(centre - detuning))
                        * l.thickness_mm
                }
            })
            .sum()
    }

    fn check_range(&self, omega: f64) -> Result<()> {
        for l in &self.layers {
            l.material.check_range(omega)?;
            l.material.check_range(omega - DERIVATIVE_STEP)?;
            l.material.check_range(omega + DERIVATIVE_STEP)?;
        }
        Ok(())
    }

    /// Group delay dφ/dω in fs: analytic for Taylor layers, centred finite
    /// differences for Sellmeier layers.
    pub fn group_delay(&self, omega: f64) -> Result<f64> {
        self.check_range(omega)?;
        Ok(self
            .layers
            .iter()
            .map(|l| match &l.material.model {
                DispersionModel::Taylor(t) => t.derivative_per_mm(omega - t.reference_omega()) * l.thickness_mm,
                DispersionModel::Sellmeier(_) => {
                    finite_difference_first(|w| l.material.phase_per_mm(w), omega) * l.thickness_mm
                }
            })
            .sum())
    }

    /// Half the second derivative, ½·d²φ/dω², in fs² (equals β·L for a Taylor layer).
    pub fn gvd(&self, omega: f64) -> Result<f64> {
        self.check_range(omega)?;
        Ok(self
            .layers
            .iter()
            .map(|l| match &l.material.model {
                DispersionModel::Taylor(t) => {
                    t.half_second_derivative_per_mm(omega - t.reference_omega()) * l.thickness_mm
                }
                DispersionModel::Sellmeier(_) => {
                    0.5 * finite_difference_second(|w| l.material.phase_per_mm(w), omega) * l.thickness_mm
                }
            })
            .sum())
    }

    /// Group delay from centred finite differences regardless of model.
    pub fn group_delay_numeric(&self, omega: f64) -> f64 {
        finite_difference_first(|w| self.phase(w), omega)
    }

    pub fn gvd_numeric(&self, omega: f64) -> f64 {
        0.5 * finite_difference_second(|w| self.phase(w), omega)
    }

    /// One-way excess group path Σ(n_g − 1)·L in mm at `omega`.
    pub fn excess_group_path_mm(&self, omega: f64) -> Result<f64> {
        Ok(self.group_delay(omega)? * C_UM_PER_FS / UM_PER_MM)
    }
}

fn finite_difference_first(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = DERIVATIVE_STEP;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn finite_difference_second(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = DERIVATIVE_STEP;
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Named materials loaded from a materials file.
#[derive(Debug, Clone, Default)]
pub struct MaterialLibrary {
    materials: BTreeMap<String, MaterialSpec>,
}

/// The materials file shipped with the project.
pub const BUILTIN_MATERIALS: &str = include_str!("../../../configs/materials.toml");

impl MaterialLibrary {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_MATERIALS).expect("shipped materials file parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, toml::Value> =
            toml::from_str(text).map_err(|e| Error::Config(format!("materials file: {e}")))?;
        let mut materials = BTreeMap::new();
        for (name, value) in raw {
            let bad = |e: &dyn std::fmt::Display| Error::Config(format!("material `{name}`: {e}"));
            let toml::Value::Table(mut table) = value else {
                return Err(bad(&"expected a table"));
            };
            let valid_range_um = table
                .remove("valid_range_um")
                .map(|v| v.try_into::<(f64, f64)>())
                .transpose()
                .map_err(|e| bad(&e))?;
            let model: DispersionModel = toml::Value::Table(table).try_into().map_err(|e| bad(&e))?;
            materials.insert(
                name.clone(),
                MaterialSpec {
                    name,
                    model,
                    valid_range_um,
                },
            );
        }
        Ok(MaterialLibrary { materials })
    }

    pub fn get(&self, name: &str) -> Result<MaterialSpec> {
        self.materials
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor(alpha: f64, beta: f64, higher: Vec<f64>) -> MaterialSpec {
        MaterialSpec::taylor(
            "t",
            Taylor {
                group_delay_fs_per_mm: alpha,
                gvd_fs2_per_mm: beta,
                higher_orders: higher,
                reference_wavelength_nm: 790.0,
            },
        )
    }

    #[test]
    fn builtin_library_has_paper_materials() {
        let lib = MaterialLibrary::builtin();
        for name in ["bk7", "calcite_o", "calcite_o_ghosh"] {
            lib.get(name).unwrap();
        }
        assert!(matches!(lib.get("unobtainium"), Err(Error::UnknownMaterial(_))));
    }

    #[test]
    fn bk7_index_and_group_index() {
        let lib = MaterialLibrary::builtin();
        let bk7 = lib.get("bk7").unwrap();
        let DispersionModel::Sellmeier(s) = &bk7.model else {
            panic!()
        };
        assert!((s.refractive_index(0.5876) - 1.5168).abs() < 1e-4);
        let stack = SampleStack::single(bk7, 28.93).unwrap();
        let w = angular_frequency(790.0);
        let ng = 1.0 + stack.group_delay(w).unwrap() * C_UM_PER_FS / 28_930.0;
        assert!((ng - 1.527).abs() < 1e-3, "{ng}");
        // excess group delay of 28.93 mm ≈ 50.9 ps
        assert!((stack.group_delay(w).unwrap() - 50_860.0).abs() < 100.0);
    }

    #[test]
    fn vendor_calcite_matches_original_formula() {
        let lib = MaterialLibrary::builtin();
        let DispersionModel::Sellmeier(s) = lib.get("calcite_o").unwrap().model else {
            panic!()
        };
        for l in [0.4, 0.633, 0.79, 1.064] {
            let l2: f64 = l * l;
            let reference = 2.69705 + 0.0192064 / (l2 - 0.01820) - 0.0151624 * l2;
            assert!((s.index_squared(l) - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_derivatives() {
        let s = SampleStack::single(taylor(10.0, 0.0, vec![]), 2.0).unwrap();
        let w = angular_frequency(790.0);
        assert_eq!(s.group_delay(w).unwrap(), 20.0);
        let s = SampleStack::single(taylor(0.0, 25.0, vec![]), 4.0).unwrap();
        assert_eq!(s.gvd(w).unwrap(), 100.0);
    }

    #[test]
    fn taylor_numeric_derivatives_agree() {
        let s = SampleStack::single(taylor(35.0, 80.0, vec![]), 3.0).unwrap();
        let w = angular_frequency(790.0);
        let gd = s.group_delay(w).unwrap();
        let gvd = s.gvd(w).unwrap();
        assert!((s.group_delay_numeric(w) / gd - 1.0).abs() < 1e-9);
        assert!((s.gvd_numeric(w) / gvd - 1.0).abs() < 1e-9);
    }

    #[test]
    fn odd_difference_drops_even_orders() {
        let w = angular_frequency(790.0);
        let a = SampleStack::single(taylor(10.0, 0.0, vec![3.0]), 2.0).unwrap();
        let b = SampleStack::single(taylor(10.0, 1e4, vec![3.0, -7e5]), 2.0).unwrap();
        for d in [-0.05, -0.01, 0.0, 0.003, 0.04] {
            assert_eq!(a.odd_difference(w, d), b.odd_difference(w, d));
        }
    }

    #[test]
    fn out_of_range_group_delay() {
        let lib = MaterialLibrary::builtin();
        let s = SampleStack::single(lib.get("bk7").unwrap(), 1.0).unwrap();
        assert!(matches!(
            s.group_delay(angular_frequency(5000.0)),
            Err(Error::OutOfBand { .. })
        ));
    }

    #[test]
    fn negative_thickness_rejected() {
        assert!(SampleStack::single(taylor(1.0, 0.0, vec![]), -1.0).is_err());
    }

    #[test]
    fn unknown_keys_in_materials_file() {
        let text = "[x]\nmodel = \"sellmeier\"\nb = [1.0]\nc_um2 = [0.01]\nbogus = 3\n";
        assert!(matches!(MaterialLibrary::from_toml_str(text), Err(Error::Config(_))));
        let text = "[x]\nmodel = \"taylor\"\ngroup_delay_fs_per_mm = 1.0\nreference_wavelength_nm = 800.0\n";
        let lib = MaterialLibrary::from_toml_str(text).unwrap();
        assert!(matches!(lib.get("x").unwrap().model, DispersionModel::Taylor(_)));
    }
}
