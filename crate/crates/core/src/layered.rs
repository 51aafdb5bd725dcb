//! Transfer-matrix solution for a pile crossing any number of layers.
//!
//! Inside layer `i` the displacement is `u = a cosh(psi_i xi) + b sinh(psi_i xi)`
//! with `xi` measured from the layer bottom. Displacement and stress are
//! continuous across interfaces; with uniform `E` and `alpha dT` that is
//! continuity of the state `(u, u')`, which is carried across a layer of
//! thickness `h` by
//!
//! ```text
//! | cosh(psi h)        sinh(psi h) / psi |
//! | psi sinh(psi h)    cosh(psi h)       |
//! ```
//!
//! The tip condition leaves one scalar unknown. Rather than propagating the
//! tip state itself, whose components grow like `exp(psi L)` and cancel at the
//! head, the solver carries the one-parameter family of tip-compatible states
//! as a relation `u' = K u + g` with bounded `K` and `g`. The head condition
//! then fixes `u(L)` directly.

use crate::error::{Error, Result};
use crate::pile_model::{
    psi, validate_pairing, LoadCase, Pairing, PileSection, ResponseProfile, Sample, SoilProfile,
    TipSupport, MAX_PSI_LENGTH,
};
use crate::roots::bisect;
use crate::AxialResponse;

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredCase {
    pile: PileSection,
    profile: SoilProfile,
    load: LoadCase,
    psis: Vec<f64>,
    pairing: Pairing,
}

impl LayeredCase {
    pub fn new(pile: PileSection, profile: SoilProfile, load: LoadCase) -> Result<Self> {
        let pairing = validate_pairing(&pile, &profile)?;
        let psis: Vec<f64> = profile.layers().iter().map(|l| psi(&pile, l)).collect();
        for (i, (layer, &p)) in profile.layers().iter().zip(&psis).enumerate() {
            let value = p * layer.thickness();
            if value > MAX_PSI_LENGTH {
                return Err(Error::HyperbolicOverflow {
                    layer: i,
                    value,
                    limit: MAX_PSI_LENGTH,
                });
            }
        }
        Ok(Self {
            pile,
            profile,
            load,
            psis,
            pairing,
        })
    }

    pub fn pile(&self) -> &PileSection {
        &self.pile
    }

    pub fn profile(&self) -> &SoilProfile {
        &self.profile
    }

    pub fn load(&self) -> LoadCase {
        self.load
    }

    pub fn psis(&self) -> &[f64] {
        &self.psis
    }

    /// Layer boundaries from tip (0) to head (`L`).
    pub fn interfaces(&self) -> &[f64] {
        self.pairing.interfaces()
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }

    pub fn with_load(&self, load: LoadCase) -> Self {
        Self { load, ..self.clone() }
    }

    pub fn solve(&self) -> Result<LayeredSolution> {
        solve_layered(self)
    }
}

/// Displacement and gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub displacement: f64,
    pub gradient: f64,
}

/// `sinh(psi h) / psi`, continuous through `psi = 0`.
fn sinh_over(psi: f64, h: f64) -> f64 {
    if psi == 0.0 {
        h
    } else {
        (psi * h).sinh() / psi
    }
}

/// Carries `state` a distance `h` up a layer with decay parameter `psi`.
pub fn propagate(state: State, psi: f64, h: f64) -> State {
    let c = (psi * h).cosh();
    let s = (psi * h).sinh();
    State {
        displacement: c * state.displacement + sinh_over(psi, h) * state.gradient,
        gradient: psi * s * state.displacement + c * state.gradient,
    }
}

/// State at the bottom of every layer, tip first.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerCoefficients {
    pub bottom_states: Vec<State>,
}

impl LayerCoefficients {
    /// `(a, b)` of `u = a cosh(psi xi) + b sinh(psi xi)` in layer `i`.
    /// For `psi = 0` the basis degenerates to `u = a + b xi`.
    pub fn hyperbolic(&self, i: usize, psi: f64) -> (f64, f64) {
        let s = self.bottom_states[i];
        if psi == 0.0 {
            (s.displacement, s.gradient)
        } else {
            (s.displacement, s.gradient / psi)
        }
    }
}

/// `tanh(psi h) / psi`, continuous through `psi = 0`.
fn tanh_over(psi: f64, h: f64) -> f64 {
    if psi == 0.0 {
        h
    } else {
        (psi * h).tanh() / psi
    }
}

/// Every state compatible with the tip condition satisfies
/// `u' = stiffness * u + offset`. Above a rigid tip `stiffness` is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Relation {
    stiffness: f64,
    offset: f64,
}

impl Relation {
    /// The relation a height `xi` further up a layer with decay `psi`.
    /// Both terms stay bounded, unlike the propagated states themselves.
    fn lift(self, psi: f64, xi: f64) -> Relation {
        let t = tanh_over(psi, xi);
        if self.stiffness.is_infinite() {
            return Relation {
                stiffness: 1.0 / t,
                offset: 0.0,
            };
        }
        let d = 1.0 + self.stiffness * t;
        Relation {
            stiffness: (psi * psi * t + self.stiffness) / d,
            offset: self.offset / ((psi * xi).cosh() * d),
        }
    }

    fn gradient(self, u: f64) -> f64 {
        self.stiffness * u + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSolution {
    case: LayeredCase,
    coefficients: LayerCoefficients,
    relations: Vec<Relation>,
    /// Displacement at each interface, tip to head.
    ends: Vec<f64>,
}

/// Solves for the per-layer coefficients of `case`.
///
/// The tip relation is carried up to the head, where the force condition
/// gives `u(L)`; interface displacements then follow on the way back down.
pub fn solve_layered(case: &LayeredCase) -> Result<LayeredSolution> {
    let pile = &case.pile;
    let free = pile.free_thermal_strain(&case.load);
    let tip = match case.profile.tip() {
        TipSupport::Spring(k_b) => Relation {
            stiffness: k_b / pile.young_modulus(),
            offset: free,
        },
        TipSupport::Rigid => Relation {
            stiffness: f64::INFINITY,
            offset: 0.0,
        },
    };

    let layers = case.profile.layers();
    let n = layers.len();
    let mut relations = Vec::with_capacity(n + 1);
    relations.push(tip);
    for (layer, &p) in layers.iter().zip(&case.psis) {
        let next = relations[relations.len() - 1].lift(p, layer.thickness());
        relations.push(next);
    }

    let head = relations[n];
    let head_gradient = free + case.load.head_force / pile.axial_rigidity();
    let rhs = head_gradient - head.offset;
    if head.stiffness == 0.0 || !head.stiffness.is_finite() || !rhs.is_finite() {
        return Err(Error::Singular(format!(
            "head relation stiffness {}: pile has no axial restraint",
            head.stiffness
        )));
    }

    let mut ends = vec![0.0; n + 1];
    ends[n] = rhs / head.stiffness;
    for i in (0..n).rev() {
        let rel = relations[i];
        ends[i] = if rel.stiffness.is_infinite() {
            0.0
        } else {
            let (p, h) = (case.psis[i], layers[i].thickness());
            let t = tanh_over(p, h);
            (ends[i + 1] / (p * h).cosh() - rel.offset * t) / (1.0 + rel.stiffness * t)
        };
    }

    let mut sol = LayeredSolution {
        case: case.clone(),
        coefficients: LayerCoefficients {
            bottom_states: Vec::new(),
        },
        relations,
        ends,
    };
    sol.coefficients.bottom_states = (0..n)
        .map(|i| {
            let s = sol.evaluate_in_layer(i, 0.0);
            State {
                displacement: s.displacement,
                gradient: s.strain,
            }
        })
        .collect();
    Ok(sol)
}

impl LayeredSolution {
    pub fn case(&self) -> &LayeredCase {
        &self.case
    }

    pub fn coefficients(&self) -> &LayerCoefficients {
        &self.coefficients
    }

    /// Response at height `xi` above the bottom of layer `i`.
    pub fn evaluate_in_layer(&self, i: usize, xi: f64) -> Sample {
        let psi = self.case.psis[i];
        let h = self.case.profile.layers()[i].thickness();
        let (below, above) = (self.ends[i], self.ends[i + 1]);
        let span = sinh_over(psi, h);
        let displacement = if xi == 0.0 {
            below
        } else if xi == h {
            above
        } else {
            (below * sinh_over(psi, h - xi) + above * sinh_over(psi, xi)) / span
        };
        let rel = self.relations[i];
        let gradient = if rel.stiffness.is_infinite() {
            above * (psi * xi).cosh() / span
        } else {
            rel.lift(psi, xi).gradient(displacement)
        };
        let x = self.case.pairing.layer_bottom(i) + xi;
        let k_s = self.case.profile.layers()[i].shear_stiffness();
        Sample {
            x,
            displacement,
            strain: gradient,
            stress: self.case.pile.stress(gradient, &self.case.load),
            shear: -k_s * displacement,
        }
    }

    /// Response at `x`. On an interface the lower layer's values are
    /// returned; `u` and stress agree from both sides but shear jumps
    /// wherever `k_s` does.
    pub fn evaluate(&self, x: f64) -> Result<Sample> {
        let l = self.case.pile.length();
        if !(0.0..=l).contains(&x) {
            return Err(Error::OutOfDomain { x, length: l });
        }
        let i = self.case.pairing.layer_at(x);
        let xi = x - self.case.pairing.layer_bottom(i);
        let mut s = self.evaluate_in_layer(i, xi);
        s.x = x;
        Ok(s)
    }

    /// Samples on both sides of an interface: `(below, above)`.
    pub fn interface_values(&self, interface: usize) -> (Sample, Sample) {
        let below = interface - 1;
        let h = self.case.profile.layers()[below].thickness();
        (
            self.evaluate_in_layer(below, h),
            self.evaluate_in_layer(interface, 0.0),
        )
    }

    /// All zeros of `u` on `[0, L]`.
    ///
    /// Within a layer `u` is a single hyperbolic (or linear) function, so it
    /// has at most one zero there unless it vanishes identically; a sign
    /// change between the layer ends brackets it.
    pub fn null_points(&self) -> Vec<f64> {
        let l = self.case.pile.length();
        if self.case.load.is_zero() {
            return Vec::new();
        }
        let tol = 1e-12 * l;
        let mut zeros: Vec<f64> = Vec::new();
        let push = |z: f64, zeros: &mut Vec<f64>| {
            if zeros.last().is_none_or(|&last| z - last > tol) {
                zeros.push(z);
            }
        };
        for (i, layer) in self.case.profile.layers().iter().enumerate() {
            let h = layer.thickness();
            let bottom = self.case.pairing.layer_bottom(i);
            let u = |xi: f64| self.evaluate_in_layer(i, xi).displacement;
            let (u0, u1) = (u(0.0), u(h));
            if u0 == 0.0 {
                push(bottom, &mut zeros);
            }
            if u0 != 0.0 && u1 != 0.0 && (u0 < 0.0) != (u1 < 0.0) {
                push(bottom + bisect(u, 0.0, h, tol), &mut zeros);
            }
            if u1 == 0.0 {
                push(bottom + h, &mut zeros);
            }
        }
        zeros
    }

    /// `samples_per_layer` uniform samples in each layer, both ends
    /// included, so each interface appears once per side.
    pub fn sample_profile(&self, samples_per_layer: usize) -> Result<ResponseProfile> {
        if samples_per_layer < 2 {
            return Err(Error::TooFew {
                what: "samples per layer",
                min: 2,
                got: samples_per_layer,
            });
        }
        let m = samples_per_layer;
        let layers = self.case.profile.layers();
        let mut samples = Vec::with_capacity(layers.len() * m);
        for (i, layer) in layers.iter().enumerate() {
            let h = layer.thickness();
            let top = self.case.pairing.interfaces()[i + 1];
            for j in 0..m {
                let mut s = self.evaluate_in_layer(i, h * j as f64 / (m - 1) as f64);
                if j == m - 1 {
                    s.x = top;
                }
                samples.push(s);
            }
        }
        Ok(ResponseProfile {
            samples,
            null_points: self.null_points(),
            solver: "layered".into(),
            case: String::new(),
        })
    }
}

impl AxialResponse for LayeredSolution {
    fn length(&self) -> f64 {
        self.case.pile.length()
    }

    fn evaluate(&self, x: f64) -> Result<Sample> {
        LayeredSolution::evaluate(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::HomogeneousCase;
    use crate::pile_model::SoilLayer;

    fn centrifuge_pile() -> PileSection {
        PileSection::circular(12.8, 1.22, 7.17e9, 7.5e-6).unwrap()
    }

    fn lausanne(load: LoadCase) -> LayeredCase {
        let pile = PileSection::circular(26.0, 0.88, 29.2e9, 1e-5).unwrap();
        let top_down = [(5.5, 16.7e6), (6.5, 10.8e6), (10.0, 18.2e6), (4.0, 121.4e6)]
            .iter()
            .map(|&(h, k)| SoilLayer::new(h, k).unwrap())
            .collect();
        let profile = SoilProfile::from_top_down(top_down, TipSupport::Spring(6675e6)).unwrap();
        LayeredCase::new(pile, profile, load).unwrap()
    }

    fn rel_close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * scale
    }

    #[test]
    fn identical_layers_reproduce_closed_form() {
        let pile = centrifuge_pile();
        let layer = SoilLayer::new(12.8, 55e6).unwrap();
        let load = LoadCase::new(15.0, -400e3).unwrap();
        for tip in [TipSupport::Rigid, TipSupport::Spring(0.0), TipSupport::Spring(3e8)] {
            let exact = HomogeneousCase::new(pile, layer, tip, load).unwrap();
            let split = SoilProfile::homogeneous(layer, tip).subdivided(5);
            let sol = LayeredCase::new(pile, split, load).unwrap().solve().unwrap();
            let scale_u = exact.sample_profile(201).unwrap().max_abs(|s| s.displacement);
            let scale_s = exact.sample_profile(201).unwrap().max_abs(|s| s.stress);
            for k in 0..=200 {
                let x = 12.8 * k as f64 / 200.0;
                let a = exact.evaluate(x).unwrap();
                let b = sol.evaluate(x).unwrap();
                assert!(rel_close(a.displacement, b.displacement, scale_u, 1e-10), "{tip:?} x={x}");
                assert!(rel_close(a.stress, b.stress, scale_s, 1e-10), "{tip:?} x={x}");
            }
        }
    }

    #[test]
    fn rigid_tip_pins_displacement() {
        let case = lausanne(LoadCase::new(13.4, 0.0).unwrap());
        let case = LayeredCase::new(
            *case.pile(),
            case.profile().with_tip(TipSupport::Rigid),
            case.load(),
        )
        .unwrap();
        let sol = case.solve().unwrap();
        assert_eq!(sol.evaluate(0.0).unwrap().displacement, 0.0);
        assert_eq!(sol.null_points(), vec![0.0]);
    }

    #[test]
    fn head_stress_matches_force() {
        let case = lausanne(LoadCase::new(14.0, -1000e3).unwrap());
        let sol = case.solve().unwrap();
        let head = sol.evaluate(26.0).unwrap();
        let target = -1000e3 / case.pile().area();
        assert!(rel_close(head.stress, target, target.abs(), 1e-10));

        let profile = sol.sample_profile(5).unwrap();
        let last = profile.head().unwrap();
        assert_eq!(last.x, 26.0);
        assert!(rel_close(last.stress, target, target.abs(), 1e-10));
    }

    #[test]
    fn interface_continuity_and_shear_jump() {
        let sol = lausanne(LoadCase::new(13.4, 0.0).unwrap()).solve().unwrap();
        let scale_u = sol.sample_profile(50).unwrap().max_abs(|s| s.displacement);
        let scale_s = sol.sample_profile(50).unwrap().max_abs(|s| s.stress);
        for i in 1..4 {
            let (below, above) = sol.interface_values(i);
            assert!(rel_close(below.displacement, above.displacement, scale_u, 1e-10));
            assert!(rel_close(below.stress, above.stress, scale_s, 1e-10));
        }
        // layer C (tip) to B: shear magnitude jumps by 121.4 / 18.2
        let (c, b) = sol.interface_values(1);
        assert!((c.shear / b.shear - 121.4 / 18.2).abs() < 1e-9);
    }

    #[test]
    fn lausanne_thermal_null_point_in_lower_half() {
        let sol = lausanne(LoadCase::new(13.4, 0.0).unwrap()).solve().unwrap();
        let zeros = sol.null_points();
        assert_eq!(zeros.len(), 1);
        assert!(zeros[0] > 0.0 && zeros[0] < 13.0, "{zeros:?}");
        assert!(sol.evaluate(zeros[0]).unwrap().displacement.abs() < 1e-15);
    }

    #[test]
    fn floating_identical_layers_null_point_mid_length() {
        let pile = centrifuge_pile();
        let profile = SoilProfile::homogeneous(SoilLayer::new(12.8, 55e6).unwrap(), TipSupport::Spring(0.0))
            .subdivided(3);
        let sol = LayeredCase::new(pile, profile, LoadCase::new(10.0, 0.0).unwrap())
            .unwrap()
            .solve()
            .unwrap();
        let zeros = sol.null_points();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0] - 6.4).abs() < 1e-9 * 12.8);
    }

    #[test]
    fn sample_counts() {
        let sol = lausanne(LoadCase::new(13.4, 0.0).unwrap()).solve().unwrap();
        let p = sol.sample_profile(2).unwrap();
        assert_eq!(p.samples.len(), 8);
        let xs: Vec<f64> = p.samples.iter().map(|s| s.x).collect();
        assert_eq!(xs, vec![0.0, 4.0, 4.0, 14.0, 14.0, 20.5, 20.5, 26.0]);
        assert!(sol.sample_profile(1).is_err());
    }

    #[test]
    fn single_layer_profile_matches_homogeneous_profile() {
        let pile = centrifuge_pile();
        let layer = SoilLayer::new(12.8, 55e6).unwrap();
        let load = LoadCase::new(20.0, 0.0).unwrap();
        let tip = TipSupport::Spring(1e8);
        let h = HomogeneousCase::new(pile, layer, tip, load).unwrap().sample_profile(33).unwrap();
        let l = LayeredCase::new(pile, SoilProfile::homogeneous(layer, tip), load)
            .unwrap()
            .solve()
            .unwrap()
            .sample_profile(33)
            .unwrap();
        let scale = h.max_abs(|s| s.displacement);
        for (a, b) in h.samples.iter().zip(&l.samples) {
            assert_eq!(a.x, b.x);
            assert!(rel_close(a.displacement, b.displacement, scale, 1e-10));
        }
        assert!((h.null_points[0] - l.null_points[0]).abs() < 1e-9);
    }

    #[test]
    fn unrestrained_pile_is_singular() {
        let pile = centrifuge_pile();
        let profile = SoilProfile::new(
            vec![SoilLayer::new(6.4, 0.0).unwrap(), SoilLayer::new(6.4, 0.0).unwrap()],
            TipSupport::Spring(0.0),
        )
        .unwrap();
        let case = LayeredCase::new(pile, profile, LoadCase::new(0.0, -1e5).unwrap()).unwrap();
        assert!(matches!(case.solve(), Err(Error::Singular(_))));
    }

    #[test]
    fn free_segment_over_stiff_layer() {
        // k_s = 0 on top: stress constant through the free segment
        let pile = centrifuge_pile();
        let profile = SoilProfile::new(
            vec![SoilLayer::new(6.4, 80e6).unwrap(), SoilLayer::new(6.4, 0.0).unwrap()],
            TipSupport::Rigid,
        )
        .unwrap();
        let sol = LayeredCase::new(pile, profile, LoadCase::new(5.0, -2e5).unwrap())
            .unwrap()
            .solve()
            .unwrap();
        let target = -2e5 / pile.area();
        for x in [6.4, 8.0, 12.8] {
            assert!(rel_close(sol.evaluate(x).unwrap().stress, target, target.abs(), 1e-10));
        }
    }

    #[test]
    fn coefficients_reconstruct_displacement() {
        let sol = lausanne(LoadCase::new(13.4, 0.0).unwrap()).solve().unwrap();
        let case = sol.case();
        for i in 0..4 {
            let p = case.psis()[i];
            let (a, b) = sol.coefficients().hyperbolic(i, p);
            let xi = 0.37 * case.profile().layers()[i].thickness();
            let direct = a * (p * xi).cosh() + b * (p * xi).sinh();
            let via = sol.evaluate_in_layer(i, xi).displacement;
            assert!((direct - via).abs() <= 1e-14 * via.abs().max(1e-12));
        }
    }

    #[test]
    fn rejects_out_of_domain_and_overflow() {
        let sol = lausanne(LoadCase::new(13.4, 0.0).unwrap()).solve().unwrap();
        assert!(sol.evaluate(26.5).is_err());
        let pile = PileSection::circular(400.0, 0.1, 1e9, 1e-5).unwrap();
        let profile = SoilProfile::new(
            vec![SoilLayer::new(1.0, 1.0).unwrap(), SoilLayer::new(399.0, 1e9).unwrap()],
            TipSupport::Rigid,
        )
        .unwrap();
        assert!(matches!(
            LayeredCase::new(pile, profile, LoadCase::default()),
            Err(Error::HyperbolicOverflow { layer: 1, .. })
        ));
    }
}
