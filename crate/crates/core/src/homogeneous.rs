//! Closed-form response of a pile in a single homogeneous layer.
//!
//! The displacement field solves `u'' = psi^2 u` with a tip spring
//! `sigma(0) = k_b u(0)` and a head force `sigma(L) = F / A`. Thermal and
//! mechanical contributions are evaluated separately and summed:
//!
//! ```text
//! u_T(x) = a dT sinh(psi (x - x0)) / (psi cosh(psi (L - x0)))
//! u_M(x) = F [E psi cosh(psi x) + k_b sinh(psi x)]
//!          / (A E psi [E psi sinh(psi L) + k_b cosh(psi L)])
//! ```
//!
//! where `x0` is the thermal null point. A rigid tip uses the exact
//! end-bearing limit (`x0 = 0`, `u_M = F sinh(psi x) / (A E psi cosh(psi L))`)
//! and `psi = 0` uses the analytic limit of a spring-free column.

use crate::error::{Error, Result};
use crate::pile_model::{
    psi, validate_pairing, LoadCase, PileSection, ResponseProfile, Sample, SoilLayer,
    SoilProfile, TipSupport, MAX_PSI_LENGTH,
};
use crate::roots::scan_zeros;
use crate::AxialResponse;

/// Sub-intervals scanned when locating zeros of a combined load field.
pub const NULL_POINT_SCAN_INTERVALS: usize = 1024;

/// Bisection tolerance for null points, relative to `L`.
pub const NULL_POINT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousCase {
    pile: PileSection,
    layer: SoilLayer,
    tip: TipSupport,
    load: LoadCase,
    psi: f64,
    null_point: f64,
}

impl HomogeneousCase {
    pub fn new(pile: PileSection, layer: SoilLayer, tip: TipSupport, load: LoadCase) -> Result<Self> {
        validate_pairing(&pile, &SoilProfile::homogeneous(layer, tip))?;
        let psi = psi(&pile, &layer);
        let psi_l = psi * pile.length();
        if psi_l > MAX_PSI_LENGTH {
            return Err(Error::HyperbolicOverflow {
                layer: 0,
                value: psi_l,
                limit: MAX_PSI_LENGTH,
            });
        }
        if psi == 0.0 && tip == TipSupport::Spring(0.0) && load.head_force != 0.0 {
            return Err(Error::Singular(
                "no shaft or tip resistance can balance a head force".into(),
            ));
        }
        let null_point = thermal_null_point(&pile, psi, tip)?;
        Ok(Self {
            pile,
            layer,
            tip,
            load,
            psi,
            null_point,
        })
    }

    /// Case on a one-layer profile.
    pub fn from_profile(pile: PileSection, profile: &SoilProfile, load: LoadCase) -> Result<Self> {
        match profile.layers() {
            [layer] => Self::new(pile, *layer, profile.tip(), load),
            layers => Err(Error::InvalidParameter {
                field: "layers",
                value: layers.len() as f64,
                reason: "homogeneous solution needs exactly one layer",
            }),
        }
    }

    pub fn pile(&self) -> &PileSection {
        &self.pile
    }

    pub fn layer(&self) -> &SoilLayer {
        &self.layer
    }

    pub fn tip(&self) -> TipSupport {
        self.tip
    }

    pub fn load(&self) -> LoadCase {
        self.load
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// Thermal null point `x0`: where the thermal part of `u` vanishes.
    ///
    /// Independent of the load magnitude. For `psi = 0` this is the limit
    /// value: the tip for any tip restraint, mid-length for a floating tip.
    pub fn null_point(&self) -> f64 {
        self.null_point
    }

    pub fn with_load(&self, load: LoadCase) -> Result<Self> {
        Self::new(self.pile, self.layer, self.tip, load)
    }

    pub fn profile(&self) -> SoilProfile {
        SoilProfile::homogeneous(self.layer, self.tip)
    }

    /// Thermal contribution `(u, strain, stress)`.
    pub fn thermal_part(&self, x: f64) -> (f64, f64, f64) {
        let free = self.pile.free_thermal_strain(&self.load);
        let e = self.pile.young_modulus();
        let l = self.pile.length();
        let x0 = self.null_point;
        if self.psi == 0.0 {
            return (free * (x - x0), free, 0.0);
        }
        let c_head = (self.psi * (l - x0)).cosh();
        let arg = self.psi * (x - x0);
        let u = free * arg.sinh() / (self.psi * c_head);
        let ratio = arg.cosh() / c_head;
        (u, free * ratio, e * free * (ratio - 1.0))
    }

    /// Mechanical contribution `(u, strain, stress)` of the head force.
    pub fn mechanical_part(&self, x: f64) -> (f64, f64, f64) {
        let f = self.load.head_force;
        let a = self.pile.area();
        let e = self.pile.young_modulus();
        let l = self.pile.length();
        let ae = a * e;
        let psi = self.psi;
        if f == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if psi == 0.0 {
            let u_tip = match self.tip {
                TipSupport::Rigid => 0.0,
                TipSupport::Spring(k_b) => f / (a * k_b),
            };
            return (u_tip + f * x / ae, f / ae, f / a);
        }
        let (s, c) = ((psi * x).sinh(), (psi * x).cosh());
        match self.tip {
            TipSupport::Rigid => {
                let c_head = (psi * l).cosh();
                (
                    f * s / (ae * psi * c_head),
                    f * c / (ae * c_head),
                    f * c / (a * c_head),
                )
            }
            TipSupport::Spring(k_b) => {
                let ep = e * psi;
                let den = ep * (psi * l).sinh() + k_b * (psi * l).cosh();
                let shape_u = ep * c + k_b * s;
                let shape_s = ep * s + k_b * c;
                (
                    f * shape_u / (ae * psi * den),
                    f * shape_s / (ae * den),
                    f * shape_s / (a * den),
                )
            }
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<Sample> {
        let l = self.pile.length();
        if !(0.0..=l).contains(&x) {
            return Err(Error::OutOfDomain { x, length: l });
        }
        let (ut, et, st) = self.thermal_part(x);
        let (um, em, sm) = self.mechanical_part(x);
        let u = ut + um;
        Ok(Sample {
            x,
            displacement: u,
            strain: et + em,
            stress: st + sm,
            shear: -self.layer.shear_stiffness() * u,
        })
    }

    fn displacement(&self, x: f64) -> f64 {
        self.thermal_part(x).0 + self.mechanical_part(x).0
    }

    /// Zeros of the total displacement on `[0, L]`.
    ///
    /// Thermal-only loads return the closed-form `x0`; otherwise the field is
    /// scanned and each sign change bisected.
    pub fn null_points(&self) -> Vec<f64> {
        let l = self.pile.length();
        if self.load.is_zero() {
            return Vec::new();
        }
        if self.load.head_force == 0.0 {
            return vec![self.null_point];
        }
        scan_zeros(
            |x| self.displacement(x),
            0.0,
            l,
            NULL_POINT_SCAN_INTERVALS,
            NULL_POINT_TOLERANCE * l,
        )
    }

    /// `n` evenly spaced samples on `[0, L]`, endpoints included.
    pub fn sample_profile(&self, n: usize) -> Result<ResponseProfile> {
        if n < 2 {
            return Err(Error::TooFew {
                what: "samples",
                min: 2,
                got: n,
            });
        }
        let l = self.pile.length();
        let samples = (0..n)
            .map(|i| {
                let x = if i == n - 1 {
                    l
                } else {
                    l * i as f64 / (n - 1) as f64
                };
                self.evaluate(x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResponseProfile {
            samples,
            null_points: self.null_points(),
            solver: "homogeneous".into(),
            case: String::new(),
        })
    }

    /// Head displacement `u(L)` for each temperature change, keeping the
    /// head force of this case. The model is elastic, so each entry is an
    /// independent quasi-static evaluation.
    pub fn head_displacement_series(&self, delta_ts: &[f64]) -> Result<Vec<f64>> {
        let l = self.pile.length();
        delta_ts
            .iter()
            .map(|&dt| {
                let case = self.with_load(LoadCase::new(dt, self.load.head_force)?)?;
                Ok(case.evaluate(l)?.displacement)
            })
            .collect()
    }
}

impl AxialResponse for HomogeneousCase {
    fn length(&self) -> f64 {
        self.pile.length()
    }

    fn evaluate(&self, x: f64) -> Result<Sample> {
        HomogeneousCase::evaluate(self, x)
    }
}

/// Thermal null point for decay parameter `psi`.
///
/// For `psi > 0` and a finite tip spring this is
/// `x0 = atanh[(cosh(psi L) - 1) / (sinh(psi L) + k_b / (E psi))] / psi`,
/// evaluated through the equivalent logarithm
/// `ln[(expm1(psi L) + kappa) / (kappa - expm1(-psi L))] / (2 psi)` with
/// `kappa = k_b / (E psi)`, which stays finite when the atanh argument
/// rounds to one.
pub fn thermal_null_point(pile: &PileSection, psi: f64, tip: TipSupport) -> Result<f64> {
    let l = pile.length();
    let k_b = match tip {
        TipSupport::Rigid => return Ok(0.0),
        TipSupport::Spring(k_b) => k_b,
    };
    if k_b == 0.0 {
        return Ok(0.5 * l);
    }
    if psi == 0.0 {
        return Ok(0.0);
    }
    let y = psi * l;
    let kappa = k_b / (pile.young_modulus() * psi);
    let num = y.exp_m1() + kappa;
    let den = kappa - (-y).exp_m1();
    let ratio = num / den;
    // atanh argument (cosh y - 1) / (sinh y + kappa) in [0, 1) <=> ratio >= 1
    if !(ratio.is_finite() && ratio >= 1.0) {
        return Err(Error::NullPointDomain(format!(
            "psi*L = {y}, k_b/(E psi) = {kappa} gives atanh ratio {ratio}"
        )));
    }
    Ok((0.5 * ratio.ln() / psi).clamp(0.0, l))
}
