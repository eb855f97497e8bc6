//! Design documents (TOML, display units) and the materials database.
//!
//! A design file looks like
//!
//! ```toml
//! name = "cw-ring-si"
//! material = "Si"              # database name, or an inline [material] table
//!
//! [structure]
//! kind = "ring"                # or "channel"
//! circumference_um = 31.4159   # channels use length_m instead
//! a_eff_um2 = 0.13
//! q_factor = 7900.0
//! n_eff = 2.47
//! # group_index, beta2_fs2_per_mm, gamma_per_w_m, kappa, sigma: optional
//!
//! [pump]
//! mode = "cw"                  # or "pulsed" with fwhm_ps and rep_rate_mhz
//! wavelength_nm = 1558.5
//! power_w = 0.001
//! # shape = "rect" | "gaussian" | "sech" | "custom"
//!
//! [filter]                     # optional
//! bandwidth_ghz = 100.0
//! detuning_rad_per_ps = 0.0
//!
//! [oracle]                     # optional
//! points = 256
//! field_model = "lorentzian"   # or "airy"
//! ```
//!
//! An inline material uses the database column names: `n2_m2_per_w`,
//! `beta_tpa_m_per_w`, `beta_tpa_bound`, `sigma_fca_m2`, `tau_c_s`.
//! Unknown keys are rejected.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{
    Bound, ChannelGeometry, Coupling, FilterSpec, Material, PumpMode, PumpShape, PumpSpec, RingGeometry, Structure,
};
use crate::oracle::FieldModel;
use crate::units::{FS2_PER_MM, GHZ, MHZ, NM, PS, RAD_PER_PS, UM, UM2};
use crate::{Error, Result};

const MATERIALS_CSV: &str = include_str!("../data/materials.csv");

pub const BUNDLED_DESIGNS: [(&str, &str); 4] = [
    ("pulsed-fiber-sio2", include_str!("../designs/pulsed-fiber-sio2.toml")),
    ("cw-waveguide-as2s3", include_str!("../designs/cw-waveguide-as2s3.toml")),
    ("pulsed-ring-diamond", include_str!("../designs/pulsed-ring-diamond.toml")),
    ("cw-ring-si", include_str!("../designs/cw-ring-si.toml")),
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialRecord {
    name: String,
    #[serde(rename = "n2_m2_per_W", alias = "n2_m2_per_w")]
    n2: f64,
    #[serde(rename = "beta_tpa_m_per_W", alias = "beta_tpa_m_per_w")]
    beta_tpa: f64,
    #[serde(default)]
    beta_tpa_bound: Bound,
    #[serde(rename = "sigma_fca_m2")]
    sigma_fca: f64,
    #[serde(rename = "tau_c_s")]
    tau_c: f64,
}

impl From<MaterialRecord> for Material {
    fn from(r: MaterialRecord) -> Self {
        Material {
            name: r.name,
            n2: r.n2,
            beta_tpa: r.beta_tpa,
            beta_tpa_bound: r.beta_tpa_bound,
            sigma_fca: r.sigma_fca,
            tau_c: r.tau_c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDb {
    pub materials: Vec<Material>,
}

impl MaterialDb {
    pub fn bundled() -> Self {
        Self::from_csv(MATERIALS_CSV.as_bytes()).expect("bundled materials table parses")
    }

    pub fn from_csv(input: impl Read) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
        let mut materials = Vec::new();
        for row in reader.deserialize::<MaterialRecord>() {
            let m: Material = row.map_err(|e| Error::Parse(format!("materials table: {e}")))?.into();
            let v = m.violations();
            if !v.is_empty() {
                return Err(Error::Validation(v));
            }
            materials.push(m);
        }
        Ok(MaterialDb { materials })
    }

    pub fn get(&self, name: &str) -> Result<&Material> {
        self.materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MaterialRef {
    Name(String),
    Inline(MaterialRecord),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum StructureBlock {
    Channel {
        length_m: f64,
        a_eff_um2: f64,
        #[serde(default)]
        beta2_fs2_per_mm: f64,
        gamma_per_w_m: Option<f64>,
    },
    Ring {
        circumference_um: f64,
        a_eff_um2: f64,
        q_factor: f64,
        n_eff: f64,
        group_index: Option<f64>,
        #[serde(default)]
        beta2_fs2_per_mm: f64,
        gamma_per_w_m: Option<f64>,
        kappa: Option<f64>,
        sigma: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum ShapeTag {
    #[default]
    Rect,
    Gaussian,
    Sech,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PumpBlock {
    mode: PumpMode,
    wavelength_nm: f64,
    power_w: f64,
    fwhm_ps: Option<f64>,
    rep_rate_mhz: Option<f64>,
    #[serde(default)]
    shape: ShapeTag,
    /// Detuning samples for a custom shape, rad/ps.
    custom_detuning_rad_per_ps: Option<Vec<f64>>,
    custom_amplitude: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterBlock {
    bandwidth_ghz: f64,
    #[serde(default)]
    detuning_rad_per_ps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub field_model: FieldModel,
}

fn default_points() -> usize {
    256
}

impl Default for OracleBlock {
    fn default() -> Self {
        OracleBlock { points: default_points(), field_model: FieldModel::default() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignDocument {
    name: Option<String>,
    material: MaterialRef,
    structure: StructureBlock,
    pump: PumpBlock,
    filter: Option<FilterBlock>,
    oracle: Option<OracleBlock>,
}

/// A resolved design, SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub name: String,
    pub material: Material,
    pub structure: Structure,
    pub pump: PumpSpec,
    pub filter: Option<FilterSpec>,
    pub oracle: OracleBlock,
}

impl Design {
    pub fn parse(text: &str, db: &MaterialDb) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Parse("design document is empty".into()));
        }
        let doc: DesignDocument = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let material = match doc.material {
            MaterialRef::Name(n) => db.get(&n)?.clone(),
            MaterialRef::Inline(r) => r.into(),
        };
        let structure = match doc.structure {
            StructureBlock::Channel { length_m, a_eff_um2, beta2_fs2_per_mm, gamma_per_w_m } => {
                Structure::Channel(ChannelGeometry {
                    length: length_m,
                    a_eff: a_eff_um2 * UM2,
                    beta2: beta2_fs2_per_mm * FS2_PER_MM,
                    gamma: gamma_per_w_m,
                })
            }
            StructureBlock::Ring {
                circumference_um,
                a_eff_um2,
                q_factor,
                n_eff,
                group_index,
                beta2_fs2_per_mm,
                gamma_per_w_m,
                kappa,
                sigma,
            } => {
                let coupling = match (kappa, sigma) {
                    (Some(kappa), Some(sigma)) => Some(Coupling { kappa, sigma }),
                    (None, None) => None,
                    _ => return Err(Error::Parse("ring coupling needs both kappa and sigma".into())),
                };
                Structure::Ring(RingGeometry {
                    circumference: circumference_um * UM,
                    a_eff: a_eff_um2 * UM2,
                    q_factor,
                    n_eff,
                    group_index,
                    beta2: beta2_fs2_per_mm * FS2_PER_MM,
                    coupling,
                    gamma: gamma_per_w_m,
                })
            }
        };
        let p = doc.pump;
        let shape = match p.shape {
            ShapeTag::Rect => PumpShape::Rect,
            ShapeTag::Gaussian => PumpShape::Gaussian,
            ShapeTag::Sech => PumpShape::Sech,
            ShapeTag::Custom => match (p.custom_detuning_rad_per_ps, p.custom_amplitude) {
                (Some(d), Some(amplitude)) => PumpShape::Custom {
                    detuning: d.into_iter().map(|x| x * RAD_PER_PS).collect(),
                    amplitude,
                },
                _ => {
                    return Err(Error::Parse(
                        "custom pump shape needs custom_detuning_rad_per_ps and custom_amplitude".into(),
                    ))
                }
            },
        };
        let pump = PumpSpec {
            mode: p.mode,
            wavelength: p.wavelength_nm * NM,
            power: p.power_w,
            fwhm: p.fwhm_ps.map(|t| t * PS),
            rep_rate: p.rep_rate_mhz.map(|f| f * MHZ),
            shape,
        };
        let filter = doc.filter.map(|f| FilterSpec::new(f.bandwidth_ghz * GHZ, f.detuning_rad_per_ps * RAD_PER_PS));

        let mut violations = material.violations();
        violations.extend(structure.violations());
        violations.extend(pump.violations());
        if let Some(f) = &filter {
            violations.extend(f.violations());
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(Design {
            name: doc.name.unwrap_or_else(|| "design".into()),
            material,
            structure,
            pump,
            filter,
            oracle: doc.oracle.unwrap_or_default(),
        })
    }

    pub fn load(path: &Path, db: &MaterialDb) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, db)
    }

    /// A bundled design by name.
    pub fn bundled(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED_DESIGNS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Parse(format!("no bundled design named '{name}'")))?;
        Self::parse(text, &MaterialDb::bundled())
    }

    /// A path to a file, or failing that, a bundled design name.
    pub fn resolve(spec: &str, db: &MaterialDb) -> Result<Self> {
        let path = Path::new(spec);
        if path.exists() {
            Self::load(path, db)
        } else if BUNDLED_DESIGNS.iter().any(|(n, _)| *n == spec) {
            Self::bundled(spec)
        } else {
            Err(Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, format!("{spec}: no such file or bundled design"))))
        }
    }

    pub fn filter(&self) -> Option<&FilterSpec> {
        self.filter.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_materials() {
        let db = MaterialDb::bundled();
        assert_eq!(db.materials.len(), 4);
        let si = db.get("si").unwrap();
        assert_eq!(si.tau_c, 1e-9);
        assert_eq!(db.get("As2S3").unwrap().beta_tpa_bound, Bound::Upper);
        assert!(matches!(db.get("GaAs"), Err(Error::UnknownMaterial(_))));
    }

    #[test]
    fn all_bundled_designs_parse() {
        for (name, _) in BUNDLED_DESIGNS {
            let d = Design::bundled(name).unwrap();
            assert_eq!(d.name, name);
        }
        let fiber = Design::bundled("pulsed-fiber-sio2").unwrap();
        assert_eq!(fiber.pump.fwhm, Some(5.0 * PS));
        assert!((fiber.structure.beta2() - 3e-27).abs() < 1e-40);
        assert!((fiber.filter.unwrap().bandwidth - 128e9).abs() < 1e-3);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = Design::bundled("cw-ring-si").map(|_| BUNDLED_DESIGNS[3].1).unwrap().to_string() + "\nextra = 1\n";
        assert!(matches!(Design::parse(&text, &MaterialDb::bundled()), Err(Error::Parse(_))));
        let bad = BUNDLED_DESIGNS[3].1.replace("q_factor", "q");
        assert!(Design::parse(&bad, &MaterialDb::bundled()).is_err());
    }

    #[test]
    fn empty_document_is_a_parse_error() {
        assert!(matches!(Design::parse("  \n", &MaterialDb::bundled()), Err(Error::Parse(_))));
    }

    #[test]
    fn inline_material_and_validation() {
        let text = r#"
material = { name = "X", n2_m2_per_w = 1e-19, beta_tpa_m_per_w = 0.0, sigma_fca_m2 = 0.0, tau_c_s = 0.0 }
[structure]
kind = "channel"
length_m = -1.0
a_eff_um2 = 1.0
[pump]
mode = "cw"
wavelength_nm = 1550.0
power_w = 0.1
"#;
        match Design::parse(text, &MaterialDb::bundled()) {
            Err(Error::Validation(v)) => assert!(v.iter().any(|s| s.contains("length"))),
            other => panic!("{other:?}"),
        }
    }
}
