//! Fitting spring stiffnesses to measured pile response.
//!
//! The misfit is a weighted least-squares sum in which each residual is
//! divided by the largest observed magnitude of its kind, so displacement,
//! strain and stress observations can be mixed. One free parameter is
//! searched by golden section; several by a bounded Nelder-Mead simplex.
//! Both searches are deterministic and record every evaluation.

use std::fmt;

use crate::error::{Error, Result};
use crate::layered::{LayeredCase, LayeredSolution};
use crate::pile_model::{LoadCase, PileSection, SoilProfile, TipSupport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservationKind {
    Displacement,
    Strain,
    Stress,
    HeadDisplacement,
}

impl ObservationKind {
    pub const ALL: [ObservationKind; 4] = [
        ObservationKind::Displacement,
        ObservationKind::Strain,
        ObservationKind::Stress,
        ObservationKind::HeadDisplacement,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ObservationKind::Displacement => "displacement",
            ObservationKind::Strain => "strain",
            ObservationKind::Stress => "stress",
            ObservationKind::HeadDisplacement => "head_displacement",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ObservationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A measured value. `x` is ignored for head displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub kind: ObservationKind,
    pub x: f64,
    pub value: f64,
    pub weight: f64,
    pub case_tag: String,
}

/// A stiffness that can be fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    TipStiffness,
    /// Shear stiffness of a layer, indexed from the tip upward.
    ShearStiffness(usize),
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::TipStiffness => write!(f, "k_b"),
            Parameter::ShearStiffness(i) => write!(f, "k_s[{i}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParameter {
    pub parameter: Parameter,
    /// Pa/m.
    pub lower: f64,
    /// Pa/m.
    pub upper: f64,
}

impl FreeParameter {
    fn range(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Everything a fit needs. Build with [`FitSpec::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitSpec {
    pile: PileSection,
    profile: SoilProfile,
    loads: Vec<(String, LoadCase)>,
    free: Vec<FreeParameter>,
    observations: Vec<Observation>,
    /// Absolute parameter tolerance, Pa/m.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl FitSpec {
    /// `profile` supplies the fixed parameters; free ones are overwritten
    /// during the search.
    pub fn new(
        pile: PileSection,
        profile: SoilProfile,
        loads: Vec<(String, LoadCase)>,
        free: Vec<FreeParameter>,
        observations: Vec<Observation>,
        tolerance: f64,
        max_evaluations: usize,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::Calibration(msg));
        if free.is_empty() {
            return bad("no free parameters".into());
        }
        for (i, fp) in free.iter().enumerate() {
            if !(fp.lower.is_finite() && fp.upper.is_finite() && fp.lower >= 0.0 && fp.lower < fp.upper) {
                return bad(format!(
                    "bounds of {} must satisfy 0 <= lower < upper, got [{}, {}]",
                    fp.parameter, fp.lower, fp.upper
                ));
            }
            if let Parameter::ShearStiffness(layer) = fp.parameter {
                if layer >= profile.layers().len() {
                    return bad(format!("{} refers to a missing layer", fp.parameter));
                }
            }
            if free[..i].iter().any(|o| o.parameter == fp.parameter) {
                return bad(format!("{} listed twice", fp.parameter));
            }
        }
        if !observations.iter().any(|o| o.weight > 0.0) {
            return bad("need at least one observation with positive weight".into());
        }
        for o in &observations {
            if !o.value.is_finite() || !o.x.is_finite() || !(o.weight.is_finite() && o.weight >= 0.0) {
                return bad(format!("invalid observation {o:?}"));
            }
            if !loads.iter().any(|(tag, _)| *tag == o.case_tag) {
                return bad(format!("observation refers to unknown case '{}'", o.case_tag));
            }
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return bad(format!("tolerance must be > 0, got {tolerance}"));
        }
        Ok(Self {
            pile,
            profile,
            loads,
            free,
            observations,
            tolerance,
            max_evaluations,
        })
    }

    pub fn free(&self) -> &[FreeParameter] {
        &self.free
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn with_weights_scaled(&self, factor: f64) -> Self {
        let mut spec = self.clone();
        for o in &mut spec.observations {
            o.weight *= factor;
        }
        spec
    }

    /// Base profile with `params` substituted for the free parameters.
    pub fn profile_with(&self, params: &[f64]) -> Result<SoilProfile> {
        let mut profile = self.profile.clone();
        for (fp, &value) in self.free.iter().zip(params) {
            profile = match fp.parameter {
                Parameter::TipStiffness => profile.with_tip(TipSupport::spring(value)?),
                Parameter::ShearStiffness(i) => profile.with_layer_stiffness(i, value)?,
            };
        }
        Ok(profile)
    }

    fn kind_scale(&self, kind: ObservationKind) -> f64 {
        let scale = self
            .observations
            .iter()
            .filter(|o| o.kind == kind)
            .map(|o| o.value.abs())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            scale
        } else {
            1.0
        }
    }
}

fn model_value(solution: &LayeredSolution, obs: &Observation) -> Result<f64> {
    let l = solution.case().pile().length();
    let s = match obs.kind {
        ObservationKind::HeadDisplacement => solution.evaluate(l)?,
        _ => solution.evaluate(obs.x)?,
    };
    Ok(match obs.kind {
        ObservationKind::Displacement | ObservationKind::HeadDisplacement => s.displacement,
        ObservationKind::Strain => s.strain,
        ObservationKind::Stress => s.stress,
    })
}

/// Weighted, kind-normalized sum of squared residuals at `params`.
pub fn objective(params: &[f64], spec: &FitSpec) -> Result<f64> {
    if params.len() != spec.free.len() {
        return Err(Error::Calibration(format!(
            "expected {} parameters, got {}",
            spec.free.len(),
            params.len()
        )));
    }
    for (fp, &v) in spec.free.iter().zip(params) {
        if !(fp.lower..=fp.upper).contains(&v) {
            return Err(Error::Calibration(format!(
                "{} = {v} outside [{}, {}]",
                fp.parameter, fp.lower, fp.upper
            )));
        }
    }
    let context = |e: Error| Error::Calibration(format!("at {params:?}: {e}"));
    let profile = spec.profile_with(params).map_err(context)?;
    let scales: Vec<f64> = ObservationKind::ALL.iter().map(|&k| spec.kind_scale(k)).collect();
    let mut total = 0.0;
    for (tag, load) in &spec.loads {
        let relevant: Vec<&Observation> = spec
            .observations
            .iter()
            .filter(|o| o.case_tag == *tag && o.weight > 0.0)
            .collect();
        if relevant.is_empty() {
            continue;
        }
        let solution = LayeredCase::new(spec.pile, profile.clone(), *load)
            .and_then(|c| c.solve())
            .map_err(context)?;
        for obs in relevant {
            let scale = scales[ObservationKind::ALL.iter().position(|&k| k == obs.kind).unwrap()];
            let r = (model_value(&solution, obs).map_err(context)? - obs.value) / scale;
            total += obs.weight * r * r;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    GoldenSection,
    /// Golden section abandoned as non-unimodal; grid scan then local refine.
    GridScan,
    NelderMead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub params: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub method: SearchMethod,
    pub trace: Vec<TraceEntry>,
}

struct Evaluator<'a> {
    spec: &'a FitSpec,
    trace: Vec<TraceEntry>,
}

impl Evaluator<'_> {
    fn eval(&mut self, params: Vec<f64>) -> Result<f64> {
        let f = objective(&params, self.spec)?;
        self.trace.push(TraceEntry { params, objective: f });
        Ok(f)
    }

    fn exhausted(&self) -> bool {
        self.trace.len() >= self.spec.max_evaluations
    }

    fn finish(self, converged: bool, method: SearchMethod) -> FitResult {
        // first minimum wins ties, keeping the result deterministic
        let best = self
            .trace
            .iter()
            .fold(None::<&TraceEntry>, |best, t| match best {
                Some(b) if b.objective <= t.objective => Some(b),
                _ => Some(t),
            })
            .cloned()
            .unwrap_or(TraceEntry {
                params: Vec::new(),
                objective: f64::INFINITY,
            });
        FitResult {
            params: best.params,
            objective: best.objective,
            evaluations: self.trace.len(),
            converged,
            method,
            trace: self.trace,
        }
    }
}

/// Minimizes the objective over the free parameters.
pub fn fit(spec: &FitSpec) -> Result<FitResult> {
    let mut ev = Evaluator {
        spec,
        trace: Vec::new(),
    };
    if spec.free.len() == 1 {
        let fp = spec.free[0];
        let (converged, method) = golden_with_fallback(&mut ev, fp.lower, fp.upper)?;
        Ok(ev.finish(converged, method))
    } else {
        let converged = nelder_mead(&mut ev)?;
        Ok(ev.finish(converged, SearchMethod::NelderMead))
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Points in the scan used when golden section detects non-unimodality.
pub const FALLBACK_GRID_POINTS: usize = 64;

fn golden_with_fallback(ev: &mut Evaluator, lower: f64, upper: f64) -> Result<(bool, SearchMethod)> {
    let fa = ev.eval(vec![lower])?;
    let fb = ev.eval(vec![upper])?;
    let c = upper - INV_PHI * (upper - lower);
    let d = lower + INV_PHI * (upper - lower);
    let fc = ev.eval(vec![c])?;
    let fd = ev.eval(vec![d])?;
    let ends = fa.max(fb);
    if fc <= ends && fd <= ends {
        let converged = golden(ev, (lower, upper), (c, fc), (d, fd))?;
        return Ok((converged, SearchMethod::GoldenSection));
    }

    let step = (upper - lower) / (FALLBACK_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..FALLBACK_GRID_POINTS)
        .map(|i| if i == FALLBACK_GRID_POINTS - 1 { upper } else { lower + step * i as f64 })
        .collect();
    let mut best = (0, f64::INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let f = ev.eval(vec![x])?;
        if f < best.1 {
            best = (i, f);
        }
    }
    let a = grid[best.0.saturating_sub(1)];
    let b = grid[(best.0 + 1).min(FALLBACK_GRID_POINTS - 1)];
    let c = b - INV_PHI * (b - a);
    let d = a + INV_PHI * (b - a);
    let fc = ev.eval(vec![c])?;
    let fd = ev.eval(vec![d])?;
    let converged = golden(ev, (a, b), (c, fc), (d, fd))?;
    Ok((converged, SearchMethod::GridScan))
}

fn golden(ev: &mut Evaluator, (mut a, mut b): (f64, f64), (mut c, mut fc): (f64, f64), (mut d, mut fd): (f64, f64)) -> Result<bool> {
    let tol = ev.spec.tolerance;
    while b - a > tol {
        if ev.exhausted() {
            return Ok(false);
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = ev.eval(vec![c])?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = ev.eval(vec![d])?;
        }
    }
    Ok(true)
}

/// Nelder-Mead on coordinates normalized to `[0, 1]` per parameter. Starts
/// from the midpoint of the bounds with edges of 10% of each range; trial
/// points are projected back onto the box.
fn nelder_mead(ev: &mut Evaluator) -> Result<bool> {
    let free = ev.spec.free.clone();
    let dim = free.len();
    let to_params = |z: &[f64]| -> Vec<f64> {
        z.iter()
            .zip(&free)
            .map(|(&zi, fp)| (fp.lower + zi * fp.range()).clamp(fp.lower, fp.upper))
            .collect()
    };
    let project = |z: Vec<f64>| -> Vec<f64> { z.into_iter().map(|v| v.clamp(0.0, 1.0)).collect() };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let start = vec![0.5; dim];
    let f = ev.eval(to_params(&start))?;
    simplex.push((start.clone(), f));
    for i in 0..dim {
        let mut z = start.clone();
        z[i] += 0.1;
        let f = ev.eval(to_params(&z))?;
        simplex.push((z, f));
    }

    let tolerances: Vec<f64> = free.iter().map(|fp| ev.spec.tolerance / fp.range()).collect();
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread_ok = simplex[1..].iter().all(|(z, _)| {
            z.iter()
                .zip(&simplex[0].0)
                .zip(&tolerances)
                .all(|((a, b), t)| (a - b).abs() <= *t)
        });
        if spread_ok || simplex[dim].1 == simplex[0].1 && simplex[0].1 == 0.0 {
            return Ok(true);
        }
        if ev.exhausted() {
            return Ok(false);
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(z, _)| z[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            project(
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect(),
            )
        };

        let reflected = along(1.0);
        let fr = ev.eval(to_params(&reflected))?;
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = ev.eval(to_params(&expanded))?;
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let z = along(0.5);
            let f = ev.eval(to_params(&z))?;
            (z, f)
        } else {
            let z = along(-0.5);
            let f = ev.eval(to_params(&z))?;
            (z, f)
        };
        if fc < fr.min(worst.1) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let z: Vec<f64> = vertex.0.iter().zip(&best).map(|(v, b)| b + 0.5 * (v - b)).collect();
            let f = ev.eval(to_params(&z))?;
            *vertex = (z, f);
        }
    }
}
