//! Scenario files: TOML with unit-suffixed keys.
//!
//! ```toml
//! [pile]
//! L_m = 12.8
//! D_m = 1.22
//! E_pa = 7.17e9
//! alpha_per_c = 7.5e-6
//!
//! [soil]
//! k_b_mpa_per_m = "rigid"   # or a number
//!
//! [[soil.layers]]           # listed top-down
//! name = "silt"
//! h_m = 12.8
//! k_s_mpa_per_m = 55.0
//!
//! [[loads]]
//! name = "dT20"
//! delta_t_c = 20.0
//! head_force_kn = 0.0
//!
//! [output]
//! samples_per_layer = 101
//! formats = ["csv"]
//! ```

use std::path::Path;

use energy_pile::{LoadCase, PileSection, SoilLayer, SoilProfile, TipSupport};
use serde::{Deserialize, Deserializer};

use crate::error::{CliError, Result};

const MPA: f64 = 1e6;
const KN: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub pile: PileBlock,
    pub soil: SoilBlock,
    pub loads: Vec<LoadBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PileBlock {
    #[serde(rename = "L_m")]
    pub length_m: f64,
    #[serde(rename = "D_m")]
    pub diameter_m: f64,
    #[serde(rename = "E_pa")]
    pub young_modulus_pa: f64,
    pub alpha_per_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TipSpec {
    /// MPa/m.
    Spring(f64),
    Rigid,
}

impl<'de> Deserialize<'de> for TipSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(TipSpec::Spring(v)),
            Raw::Word(w) if w == "rigid" => Ok(TipSpec::Rigid),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a stiffness in MPa/m or \"rigid\", got \"{w}\""
            ))),
        }
    }
}

impl TipSpec {
    fn parse(s: &str) -> Option<Self> {
        if s == "rigid" {
            Some(TipSpec::Rigid)
        } else {
            s.parse().ok().map(TipSpec::Spring)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoilBlock {
    pub k_b_mpa_per_m: TipSpec,
    pub layers: Vec<LayerBlock>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerBlock {
    pub name: String,
    pub h_m: f64,
    pub k_s_mpa_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadBlock {
    pub name: String,
    #[serde(default)]
    pub delta_t_c: f64,
    #[serde(default)]
    pub head_force_kn: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_samples")]
    pub samples_per_layer: usize,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_samples() -> usize {
    101
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            samples_per_layer: default_samples(),
            formats: default_formats(),
        }
    }
}

/// A scenario converted to SI solver inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub pile: PileSection,
    pub profile: SoilProfile,
    pub loads: Vec<(String, LoadCase)>,
    /// Layer names in tip-up order, matching `profile.layers()`.
    pub layer_names: Vec<String>,
}

impl Model {
    pub fn load(&self, name: &str) -> Result<LoadCase> {
        self.loads
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| *l)
            .ok_or_else(|| CliError::MissingCase {
                name: name.into(),
                available: self.loads.iter().map(|(n, _)| n.clone()).collect(),
            })
    }

    /// Tip-up index of the layer called `name`.
    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layer_names.iter().position(|n| n == name)
    }
}

impl Scenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.into(),
            message: e.to_string(),
        })?;
        scenario.model(origin)?;
        Ok(scenario)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.into(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Applies `key=value`: `k_b_mpa_per_m=VALUE|rigid` or
    /// `k_s_mpa_per_m.LAYER=VALUE`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let usage = || CliError::Usage(format!(
            "override '{spec}' must be k_b_mpa_per_m=VALUE|rigid or k_s_mpa_per_m.LAYER=VALUE"
        ));
        let (key, value) = spec.split_once('=').ok_or_else(usage)?;
        if key == "k_b_mpa_per_m" {
            self.soil.k_b_mpa_per_m = TipSpec::parse(value).ok_or_else(usage)?;
        } else if let Some(name) = key.strip_prefix("k_s_mpa_per_m.") {
            let v: f64 = value.parse().map_err(|_| usage())?;
            let layer = self
                .soil
                .layers
                .iter_mut()
                .find(|l| l.name == name)
                .ok_or_else(|| CliError::Usage(format!("override names unknown layer '{name}'")))?;
            layer.k_s_mpa_per_m = v;
        } else {
            return Err(usage());
        }
        Ok(())
    }

    /// Converts to solver inputs, reporting the offending field on failure.
    pub fn model(&self, origin: &str) -> Result<Model> {
        let bad = |field: String, message: String| CliError::Parse {
            path: origin.into(),
            message: format!("{field}: {message}"),
        };
        let p = &self.pile;
        let pile = PileSection::circular(p.length_m, p.diameter_m, p.young_modulus_pa, p.alpha_per_c)
            .map_err(|e| bad("pile".into(), e.to_string()))?;

        if self.soil.layers.is_empty() {
            return Err(bad("soil.layers".into(), "at least one layer is required".into()));
        }
        let mut layers = Vec::with_capacity(self.soil.layers.len());
        for (i, l) in self.soil.layers.iter().enumerate() {
            if self.soil.layers[..i].iter().any(|o| o.name == l.name) {
                return Err(bad(format!("soil.layers[{i}].name"), format!("duplicate layer name '{}'", l.name)));
            }
            let layer = SoilLayer::new(l.h_m, l.k_s_mpa_per_m * MPA)
                .map_err(|e| bad(format!("soil.layers[{i}] ('{}')", l.name), e.to_string()))?;
            layers.push(layer);
        }
        let tip = match self.soil.k_b_mpa_per_m {
            TipSpec::Rigid => TipSupport::Rigid,
            TipSpec::Spring(k) => {
                TipSupport::spring(k * MPA).map_err(|e| bad("soil.k_b_mpa_per_m".into(), e.to_string()))?
            }
        };
        let profile =
            SoilProfile::from_top_down(layers, tip).map_err(|e| bad("soil.layers".into(), e.to_string()))?;
        energy_pile::pile_model::validate_pairing(&pile, &profile)
            .map_err(|e| bad("soil.layers".into(), e.to_string()))?;

        if self.loads.is_empty() {
            return Err(bad("loads".into(), "at least one load case is required".into()));
        }
        let mut loads = Vec::with_capacity(self.loads.len());
        for (i, l) in self.loads.iter().enumerate() {
            if self.loads[..i].iter().any(|o| o.name == l.name) {
                return Err(bad(format!("loads[{i}].name"), format!("duplicate load name '{}'", l.name)));
            }
            let load = LoadCase::new(l.delta_t_c, l.head_force_kn * KN)
                .map_err(|e| bad(format!("loads[{i}] ('{}')", l.name), e.to_string()))?;
            loads.push((l.name.clone(), load));
        }

        if self.output.samples_per_layer < 2 {
            return Err(bad("output.samples_per_layer".into(), "must be at least 2".into()));
        }
        if let Some(f) = self.output.formats.iter().find(|f| f.as_str() != "csv") {
            return Err(bad("output.formats".into(), format!("unsupported format '{f}' (only csv)")));
        }

        Ok(Model {
            pile,
            profile,
            loads,
            layer_names: self.soil.layers.iter().rev().map(|l| l.name.clone()).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[pile]
L_m = 10
D_m = 1.0
E_pa = 3e10
alpha_per_c = 1e-5

[soil]
k_b_mpa_per_m = 0

[[soil.layers]]
name = "top"
h_m = 4.0
k_s_mpa_per_m = 20.0

[[soil.layers]]
name = "bottom"
h_m = 6.0
k_s_mpa_per_m = 80.0

[[loads]]
name = "heat"
delta_t_c = 10
"#;

    #[test]
    fn parses_integers_and_defaults() {
        let s = Scenario::parse(MINIMAL, "mem").unwrap();
        assert_eq!(s.soil.k_b_mpa_per_m, TipSpec::Spring(0.0));
        assert_eq!(s.output, OutputBlock::default());
        let m = s.model("mem").unwrap();
        assert_eq!(m.layer_names, vec!["bottom", "top"]);
        assert_eq!(m.profile.layers()[0].shear_stiffness(), 80e6);
        assert_eq!(m.load("heat").unwrap(), LoadCase::new(10.0, 0.0).unwrap());
    }

    #[test]
    fn missing_case_lists_available() {
        let m = Scenario::parse(MINIMAL, "mem").unwrap().model("mem").unwrap();
        let err = m.load("cool").unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("heat"));
    }

    #[test]
    fn parse_errors_name_line_or_field() {
        let typo = MINIMAL.replace("h_m = 4.0", "hm = 4.0");
        let err = Scenario::parse(&typo, "mem").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line"), "{err}");

        let short = MINIMAL.replace("h_m = 6.0", "h_m = 5.0");
        let err = Scenario::parse(&short, "mem").unwrap_err().to_string();
        assert!(err.contains("soil.layers"), "{err}");

        let negative = MINIMAL.replace("k_s_mpa_per_m = 80.0", "k_s_mpa_per_m = -1.0");
        let err = Scenario::parse(&negative, "mem").unwrap_err().to_string();
        assert!(err.contains("soil.layers[1] ('bottom')"), "{err}");

        let word = MINIMAL.replace("k_b_mpa_per_m = 0", "k_b_mpa_per_m = \"stiff\"");
        assert!(Scenario::parse(&word, "mem").is_err());
    }

    #[test]
    fn overrides() {
        let mut s = Scenario::parse(MINIMAL, "mem").unwrap();
        s.apply_override("k_b_mpa_per_m=rigid").unwrap();
        assert_eq!(s.soil.k_b_mpa_per_m, TipSpec::Rigid);
        s.apply_override("k_b_mpa_per_m=250").unwrap();
        assert_eq!(s.soil.k_b_mpa_per_m, TipSpec::Spring(250.0));
        s.apply_override("k_s_mpa_per_m.top=33").unwrap();
        assert_eq!(s.soil.layers[0].k_s_mpa_per_m, 33.0);
        for bad in ["k_b=1", "k_b_mpa_per_m", "k_s_mpa_per_m.middle=1", "k_b_mpa_per_m=soft"] {
            assert_eq!(s.apply_override(bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }
}
