//! Second-order finite-difference solver for the pile boundary-value
//! problem, used to verify the analytic solvers.
//!
//! This module deliberately depends on nothing but the domain types; it
//! never calls the closed-form or transfer-matrix code.
//!
//! Interior nodes use a vertex-centred control volume,
//!
//! ```text
//! (u[j+1] - u[j]) / h_r - (u[j] - u[j-1]) / h_l = (psi_l^2 h_l + psi_r^2 h_r) / 2 * u[j]
//! ```
//!
//! scaled by `2 / (h_l + h_r)`, which inside a layer is the usual central
//! difference `(u[j-1] - 2 u[j] + u[j+1]) / h^2 = psi^2 u[j]`. Layer
//! interfaces are always grid nodes. The tip and head rows use three-point
//! one-sided derivatives; their extra entry is eliminated against the
//! neighbouring interior row so the system stays tridiagonal.

use crate::error::{Error, Result};
use crate::pile_model::{
    validate_pairing, LoadCase, PileSection, ResponseProfile, Sample, SoilLayer, SoilProfile,
    TipSupport,
};

/// Node layout and node-wise soil data.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub nodes: Vec<f64>,
    /// `psi^2` entering each node's row; a length-weighted mean at interfaces.
    pub psi_sq: Vec<f64>,
    /// Spring stiffness for shear output (lower layer at interfaces).
    pub shear_stiffness: Vec<f64>,
    /// True where the node sits on a layer interface.
    pub interface: Vec<bool>,
}

fn psi_sq(pile: &PileSection, layer: &SoilLayer) -> f64 {
    pile.perimeter() / pile.area() * layer.shear_stiffness() / pile.young_modulus()
}

impl FdGrid {
    /// `n` equally spaced nodes in a single layer.
    pub fn uniform(pile: &PileSection, layer: &SoilLayer, n: usize) -> Result<Self> {
        check_nodes(n)?;
        let l = pile.length();
        let segments = n - 1;
        let nodes = (0..n)
            .map(|j| if j == segments { l } else { l * j as f64 / segments as f64 })
            .collect();
        Ok(Self {
            nodes,
            psi_sq: vec![psi_sq(pile, layer); n],
            shear_stiffness: vec![layer.shear_stiffness(); n],
            interface: vec![false; n],
        })
    }

    /// About `n` nodes distributed over the layers in proportion to their
    /// thickness, with every interface on a node and at least two segments
    /// per layer.
    pub fn snapped(pile: &PileSection, profile: &SoilProfile, n: usize) -> Result<Self> {
        check_nodes(n)?;
        let pairing = validate_pairing(pile, profile)?;
        let bounds = pairing.interfaces();
        let l = pile.length();
        let total = (n - 1) as f64;
        let layers = profile.layers();

        let mut nodes = vec![0.0];
        let mut psi = vec![psi_sq(pile, &layers[0])];
        let mut shear = vec![layers[0].shear_stiffness()];
        let mut interface = vec![false];
        for (i, layer) in layers.iter().enumerate() {
            let (bottom, top) = (bounds[i], bounds[i + 1]);
            let segments = ((total * layer.thickness() / l).round() as usize).max(2);
            let p = psi_sq(pile, layer);
            let k = layer.shear_stiffness();
            if i > 0 {
                // interface node shared with the layer below
                let last = nodes.len() - 1;
                let h_l = nodes[last] - nodes[last - 1];
                let h_r = (top - bottom) / segments as f64;
                psi[last] = (psi[last] * h_l + p * h_r) / (h_l + h_r);
                interface[last] = true;
            } else {
                psi[0] = p;
            }
            for j in 1..=segments {
                let x = if j == segments {
                    top
                } else {
                    bottom + (top - bottom) * j as f64 / segments as f64
                };
                nodes.push(x);
                psi.push(p);
                shear.push(k);
                interface.push(false);
            }
        }
        Ok(Self {
            nodes,
            psi_sq: psi,
            shear_stiffness: shear,
            interface,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest node spacing.
    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

fn check_nodes(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::TooFew {
            what: "grid nodes",
            min: 3,
            got: n,
        })
    } else {
        Ok(())
    }
}

/// Tridiagonal system after elimination of the boundary-stencil corners.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

/// Assembles the difference equations on `grid`.
pub fn assemble(grid: &FdGrid, pile: &PileSection, tip: TipSupport, load: &LoadCase) -> FdSystem {
    let m = grid.len();
    let x = &grid.nodes;
    let e = pile.young_modulus();
    let free = pile.thermal_expansion() * load.delta_t;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];

    for j in 1..m - 1 {
        let h_l = x[j] - x[j - 1];
        let h_r = x[j + 1] - x[j];
        let half = 0.5 * (h_l + h_r);
        lower[j] = 1.0 / (h_l * half);
        upper[j] = 1.0 / (h_r * half);
        diag[j] = -(lower[j] + upper[j]) - grid.psi_sq[j];
    }

    // tip: E (-3 u0 + 4 u1 - u2) / (2 h) - k_b u0 = E alpha dT
    match tip {
        TipSupport::Rigid => {
            diag[0] = 1.0;
            upper[0] = 0.0;
            rhs[0] = 0.0;
        }
        TipSupport::Spring(k_b) => {
            let h = x[1] - x[0];
            let (c0, c1, c2) = (-1.5 * e / h - k_b, 2.0 * e / h, -0.5 * e / h);
            let ratio = c2 / upper[1];
            diag[0] = c0 - ratio * lower[1];
            upper[0] = c1 - ratio * diag[1];
            rhs[0] = e * free;
        }
    }

    // head: E (3 u[m-1] - 4 u[m-2] + u[m-3]) / (2 h) = F / A + E alpha dT
    let h = x[m - 1] - x[m - 2];
    let (c0, c1, c2) = (1.5 * e / h, -2.0 * e / h, 0.5 * e / h);
    let ratio = c2 / lower[m - 2];
    diag[m - 1] = c0 - ratio * upper[m - 2];
    lower[m - 1] = c1 - ratio * diag[m - 2];
    rhs[m - 1] = load.head_force / pile.area() + e * free;

    FdSystem {
        lower,
        diag,
        upper,
        rhs,
    }
}

impl FdSystem {
    /// Thomas elimination without pivoting.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.lower[i] * c[i - 1];
            }
            let scale = self.diag[i].abs() + self.lower[i].abs() + self.upper[i].abs();
            if !pivot.is_finite() || pivot.abs() <= 1e-13 * scale {
                return Err(Error::Singular(format!(
                    "zero pivot at row {i}: pile has no axial restraint"
                )));
            }
            c[i] = self.upper[i] / pivot;
            let prev = if i > 0 { self.lower[i] * d[i - 1] } else { 0.0 };
            d[i] = (self.rhs[i] - prev) / pivot;
        }
        let mut u = vec![0.0; n];
        u[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            u[i] = d[i] - c[i] * u[i + 1];
        }
        Ok(u)
    }
}

/// Nodal solution of the difference equations.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub grid: FdGrid,
    pub samples: Vec<Sample>,
}

fn solve_on(grid: FdGrid, pile: &PileSection, tip: TipSupport, load: &LoadCase) -> Result<FdSolution> {
    let u = assemble(&grid, pile, tip, load).solve()?;
    let x = &grid.nodes;
    let m = grid.len();
    let forward = |j: usize| (-3.0 * u[j] + 4.0 * u[j + 1] - u[j + 2]) / (2.0 * (x[j + 1] - x[j]));
    let backward = |j: usize| (3.0 * u[j] - 4.0 * u[j - 1] + u[j - 2]) / (2.0 * (x[j] - x[j - 1]));
    let samples = (0..m)
        .map(|j| {
            let strain = if j == 0 {
                forward(0)
            } else if j == m - 1 || grid.interface[j] {
                // one-sided within the lower layer, where u is smooth
                backward(j)
            } else {
                (u[j + 1] - u[j - 1]) / (x[j + 1] - x[j - 1])
            };
            Sample {
                x: x[j],
                displacement: u[j],
                strain,
                stress: pile.stress(strain, load),
                shear: -grid.shear_stiffness[j] * u[j],
            }
        })
        .collect();
    Ok(FdSolution { grid, samples })
}

/// Solves a single-layer problem on a uniform grid of `n` nodes.
pub fn solve_fd_homogeneous(
    pile: &PileSection,
    layer: &SoilLayer,
    tip: TipSupport,
    load: &LoadCase,
    n: usize,
) -> Result<FdSolution> {
    validate_pairing(pile, &SoilProfile::homogeneous(*layer, tip))?;
    solve_on(FdGrid::uniform(pile, layer, n)?, pile, tip, load)
}

/// Solves a layered problem on an interface-snapped grid of about `n` nodes.
pub fn solve_fd(pile: &PileSection, profile: &SoilProfile, load: &LoadCase, n: usize) -> Result<FdSolution> {
    solve_on(FdGrid::snapped(pile, profile, n)?, pile, profile.tip(), load)
}

impl FdSolution {
    /// Sign changes of nodal `u`, located by linear interpolation, plus
    /// exact nodal zeros.
    pub fn null_points(&self) -> Vec<f64> {
        let s = &self.samples;
        if s.iter().all(|p| p.displacement == 0.0) {
            return Vec::new();
        }
        let mut zeros = Vec::new();
        for (j, p) in s.iter().enumerate() {
            if p.displacement == 0.0 {
                zeros.push(p.x);
            } else if j + 1 < s.len() {
                let q = &s[j + 1];
                if q.displacement != 0.0 && (p.displacement < 0.0) != (q.displacement < 0.0) {
                    let t = p.displacement / (p.displacement - q.displacement);
                    zeros.push(p.x + t * (q.x - p.x));
                }
            }
        }
        zeros
    }

    pub fn to_profile(&self) -> ResponseProfile {
        ResponseProfile {
            samples: self.samples.clone(),
            null_points: self.null_points(),
            solver: "finite-difference".into(),
            case: String::new(),
        }
    }

    /// `A (sigma(L) - sigma(0)) + p * trapezoid(tau)`, which vanishes for an
    /// equilibrated pile up to quadrature error. Each segment is integrated
    /// with its own layer's stiffness.
    pub fn equilibrium_residual(&self, pile: &PileSection) -> f64 {
        let s = &self.samples;
        // the node above a segment always carries that segment's stiffness
        let shaft: f64 = s
            .windows(2)
            .zip(&self.grid.shear_stiffness[1..])
            .map(|(w, k)| -0.5 * k * (w[0].displacement + w[1].displacement) * (w[1].x - w[0].x))
            .sum();
        pile.area() * (s[s.len() - 1].stress - s[0].stress) + pile.perimeter() * shaft
    }
}

/// Relative L-infinity discrepancies of a finite-difference solution
/// against a reference evaluated at the same nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub displacement: f64,
    pub strain: f64,
    pub stress: f64,
}

impl Discrepancy {
    pub fn max(&self) -> f64 {
        self.displacement.max(self.strain).max(self.stress)
    }
}

fn relative_linf(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for (approx, reference) in pairs {
        err = err.max((approx - reference).abs());
        scale = scale.max(reference.abs());
    }
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Compares nodal values with `reference(x)`. The error in each field is
/// divided by the largest magnitude of that field in the reference.
pub fn discrepancy(
    solution: &FdSolution,
    reference: impl Fn(f64) -> Result<Sample>,
) -> Result<Discrepancy> {
    let refs = solution
        .samples
        .iter()
        .map(|s| reference(s.x))
        .collect::<Result<Vec<_>>>()?;
    let zip = || solution.samples.iter().zip(&refs);
    Ok(Discrepancy {
        displacement: relative_linf(zip().map(|(a, b)| (a.displacement, b.displacement))),
        strain: relative_linf(zip().map(|(a, b)| (a.strain, b.strain))),
        stress: relative_linf(zip().map(|(a, b)| (a.stress, b.stress))),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub order: f64,
    /// `(nodes, max spacing, max relative error)` per grid.
    pub errors: Vec<(usize, f64, f64)>,
    /// Set when the error does not decrease monotonically with `h`.
    pub warning: Option<String>,
}

/// Observed order of accuracy over a sequence of grid sizes, measured
/// against `reference`. Each size must at least double the previous one.
pub fn observed_convergence_order(
    pile: &PileSection,
    profile: &SoilProfile,
    load: &LoadCase,
    sizes: &[usize],
    reference: impl Fn(f64) -> Result<Sample>,
) -> Result<ConvergenceReport> {
    if sizes.len() < 3 {
        return Err(Error::TooFew {
            what: "grid sizes",
            min: 3,
            got: sizes.len(),
        });
    }
    if sizes.windows(2).any(|w| w[1] < 2 * w[0]) {
        return Err(Error::InvalidParameter {
            field: "grid sizes",
            value: f64::NAN,
            reason: "each size must at least double the previous",
        });
    }
    let mut errors = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sol = solve_fd(pile, profile, load, n)?;
        let err = discrepancy(&sol, &reference)?.max();
        errors.push((sol.grid.len(), sol.grid.max_spacing(), err));
    }
    let pts: Vec<(f64, f64)> = errors.iter().map(|&(_, h, e)| (h.ln(), e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let warning = errors
        .windows(2)
        .any(|w| w[1].2 >= w[0].2)
        .then(|| "error does not decrease monotonically with refinement".to_string());
    Ok(ConvergenceReport {
        order: sxy / sxx,
        errors,
        warning,
    })
}
