//! Pile, soil and load descriptions shared by every solver.
//!
//! Coordinates follow a single convention throughout the crate: `x` is
//! measured upward from the pile tip (`x = 0`) to the head (`x = L`).
//! Tension is positive, so a compressive head load has `F < 0`. All values
//! are SI base units; spring stiffnesses are Pa/m.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest admissible `psi * h` for a single hyperbolic segment.
///
/// `cosh(710)` overflows an `f64`; 350 leaves room for products of
/// several terms of that size.
pub const MAX_PSI_LENGTH: f64 = 350.0;

/// Relative tolerance for layer thicknesses summing to the pile length.
pub const PAIRING_TOLERANCE: f64 = 1e-9;

fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            reason: "must be finite and > 0",
        })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

fn finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            reason: "must be finite",
        })
    }
}

/// Geometry and thermo-elastic constants of the pile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PileSection {
    length: f64,
    diameter: f64,
    area: f64,
    perimeter: f64,
    young_modulus: f64,
    thermal_expansion: f64,
}

impl PileSection {
    /// Builds a solid circular pile: `A = pi D^2 / 4`, `p = pi D`.
    pub fn circular(
        length: f64,
        diameter: f64,
        young_modulus: f64,
        thermal_expansion: f64,
    ) -> Result<Self> {
        let length = positive("length", length)?;
        let diameter = positive("diameter", diameter)?;
        let young_modulus = positive("young_modulus", young_modulus)?;
        let thermal_expansion = finite("thermal_expansion", thermal_expansion)?;
        Ok(Self {
            length,
            diameter,
            area: PI * diameter * diameter / 4.0,
            perimeter: PI * diameter,
            young_modulus,
            thermal_expansion,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn young_modulus(&self) -> f64 {
        self.young_modulus
    }

    pub fn thermal_expansion(&self) -> f64 {
        self.thermal_expansion
    }

    /// Perimeter over area, `4 / D` for a circular section.
    pub fn geometric_ratio(&self) -> f64 {
        4.0 / self.diameter
    }

    /// Axial rigidity `A E`.
    pub fn axial_rigidity(&self) -> f64 {
        self.area * self.young_modulus
    }

    /// Strain of an unrestrained pile, `alpha * dT`.
    pub fn free_thermal_strain(&self, load: &LoadCase) -> f64 {
        self.thermal_expansion * load.delta_t
    }

    /// Stress from strain via the thermo-elastic law `E (eps - alpha dT)`.
    pub fn stress(&self, strain: f64, load: &LoadCase) -> f64 {
        self.young_modulus * (strain - self.free_thermal_strain(load))
    }
}

/// Homogeneous soil layer acting on the shaft through a linear shear spring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilLayer {
    thickness: f64,
    shear_stiffness: f64,
}

impl SoilLayer {
    /// `shear_stiffness` in Pa/m; zero models a free-standing segment.
    pub fn new(thickness: f64, shear_stiffness: f64) -> Result<Self> {
        Ok(Self {
            thickness: positive("thickness", thickness)?,
            shear_stiffness: non_negative("shear_stiffness", shear_stiffness)?,
        })
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn shear_stiffness(&self) -> f64 {
        self.shear_stiffness
    }

    pub fn with_shear_stiffness(self, shear_stiffness: f64) -> Result<Self> {
        Self::new(self.thickness, shear_stiffness)
    }
}

/// Support at the pile tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TipSupport {
    /// Linear spring with stiffness in Pa/m; zero is a floating tip.
    Spring(f64),
    /// Ideal end bearing, the limit of an infinitely stiff spring.
    Rigid,
}

impl TipSupport {
    pub fn spring(stiffness: f64) -> Result<Self> {
        Ok(TipSupport::Spring(non_negative("tip_stiffness", stiffness)?))
    }

    pub fn is_rigid(&self) -> bool {
        matches!(self, TipSupport::Rigid)
    }

    pub fn stiffness(&self) -> Option<f64> {
        match *self {
            TipSupport::Spring(k) => Some(k),
            TipSupport::Rigid => None,
        }
    }
}

/// Ordered layer stack, tip first, plus the tip support.
#[derive(Debug, Clone, PartialEq)]
pub struct SoilProfile {
    layers: Vec<SoilLayer>,
    tip: TipSupport,
}

impl SoilProfile {
    /// `layers` are listed from the tip upward.
    pub fn new(layers: Vec<SoilLayer>, tip: TipSupport) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if let TipSupport::Spring(k) = tip {
            non_negative("tip_stiffness", k)?;
        }
        Ok(Self { layers, tip })
    }

    /// Same as [`SoilProfile::new`] but with layers listed head first, the
    /// order of a borehole log.
    pub fn from_top_down(mut layers: Vec<SoilLayer>, tip: TipSupport) -> Result<Self> {
        layers.reverse();
        Self::new(layers, tip)
    }

    pub fn homogeneous(layer: SoilLayer, tip: TipSupport) -> Self {
        Self {
            layers: vec![layer],
            tip,
        }
    }

    pub fn layers(&self) -> &[SoilLayer] {
        &self.layers
    }

    pub fn tip(&self) -> TipSupport {
        self.tip
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(SoilLayer::thickness).sum()
    }

    pub fn with_tip(&self, tip: TipSupport) -> Self {
        Self {
            layers: self.layers.clone(),
            tip,
        }
    }

    pub fn with_layer_stiffness(&self, index: usize, shear_stiffness: f64) -> Result<Self> {
        let mut layers = self.layers.clone();
        let layer = layers.get_mut(index).ok_or(Error::InvalidParameter {
            field: "layer_index",
            value: index as f64,
            reason: "no such layer",
        })?;
        *layer = layer.with_shear_stiffness(shear_stiffness)?;
        Ok(Self {
            layers,
            tip: self.tip,
        })
    }

    /// Splits every layer into `parts` equal sub-layers of the same stiffness.
    pub fn subdivided(&self, parts: usize) -> Self {
        let parts = parts.max(1);
        let layers = self
            .layers
            .iter()
            .flat_map(|l| {
                let h = l.thickness / parts as f64;
                std::iter::repeat_n(
                    SoilLayer {
                        thickness: h,
                        shear_stiffness: l.shear_stiffness,
                    },
                    parts,
                )
            })
            .collect();
        Self {
            layers,
            tip: self.tip,
        }
    }
}

/// Thermal and mechanical loading of one analysis case.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoadCase {
    /// Pile temperature change relative to the soil, °C.
    pub delta_t: f64,
    /// Axial head force, N, tension positive.
    pub head_force: f64,
}

impl LoadCase {
    pub fn new(delta_t: f64, head_force: f64) -> Result<Self> {
        Ok(Self {
            delta_t: finite("delta_t", delta_t)?,
            head_force: finite("head_force", head_force)?,
        })
    }

    pub fn thermal(&self) -> Self {
        Self {
            delta_t: self.delta_t,
            head_force: 0.0,
        }
    }

    pub fn mechanical(&self) -> Self {
        Self {
            delta_t: 0.0,
            head_force: self.head_force,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            delta_t: self.delta_t * factor,
            head_force: self.head_force * factor,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.delta_t == 0.0 && self.head_force == 0.0
    }
}

/// `p / A`, the geometric factor of the decay parameter.
pub fn geometric_factor(pile: &PileSection) -> f64 {
    pile.geometric_ratio()
}

/// `k_s / E`, the stiffness factor of the decay parameter.
pub fn stiffness_factor(pile: &PileSection, layer: &SoilLayer) -> f64 {
    layer.shear_stiffness / pile.young_modulus
}

/// Decay parameter `psi = sqrt((p/A)(k_s/E))`, 1/m.
pub fn psi(pile: &PileSection, layer: &SoilLayer) -> f64 {
    (geometric_factor(pile) * stiffness_factor(pile, layer)).sqrt()
}

/// A pile and profile whose thicknesses agree with the pile length.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    interfaces: Vec<f64>,
}

impl Pairing {
    /// Layer boundaries from tip to head, starting at 0 and ending at `L`.
    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    /// Index of the layer containing `x`. A point on an interface belongs
    /// to the layer below it.
    pub fn layer_at(&self, x: f64) -> usize {
        let n = self.interfaces.len() - 1;
        // first interior boundary >= x
        self.interfaces[1..n].partition_point(|&b| b < x)
    }

    pub fn layer_bottom(&self, index: usize) -> f64 {
        self.interfaces[index]
    }
}

/// Checks that the layers span the pile and returns the interface depths.
pub fn validate_pairing(pile: &PileSection, profile: &SoilProfile) -> Result<Pairing> {
    let sum = profile.total_thickness();
    let length = pile.length();
    if (sum - length).abs() > PAIRING_TOLERANCE * length {
        return Err(Error::ThicknessMismatch { sum, length });
    }
    let mut interfaces = Vec::with_capacity(profile.layers().len() + 1);
    let mut x = 0.0;
    interfaces.push(x);
    for layer in profile.layers() {
        x += layer.thickness();
        interfaces.push(x);
    }
    // absorb summation rounding
    *interfaces.last_mut().unwrap() = length;
    Ok(Pairing { interfaces })
}

/// One sampled point of a response.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub x: f64,
    pub displacement: f64,
    pub strain: f64,
    pub stress: f64,
    pub shear: f64,
}

impl Sample {
    pub fn depth(&self, length: f64) -> f64 {
        length - self.x
    }
}

/// Sampled displacement, strain, stress and interface shear along the pile.
///
/// Samples are ordered by `x`. Profiles produced by the layered solver hold
/// two samples at each interface (below then above) so that the jump in
/// shear is representable; `x` is therefore non-decreasing rather than
/// strictly increasing in that case.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseProfile {
    pub samples: Vec<Sample>,
    pub null_points: Vec<f64>,
    pub solver: String,
    pub case: String,
}

impl ResponseProfile {
    pub fn max_abs(&self, field: impl Fn(&Sample) -> f64) -> f64 {
        self.samples
            .iter()
            .map(|s| field(s).abs())
            .fold(0.0, f64::max)
    }

    pub fn head(&self) -> Option<&Sample> {
        self.samples.last()
    }
}
