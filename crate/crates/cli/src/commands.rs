//! Command implementations. Each returns the text to emit; the binary
//! decides where it goes.

use std::fmt::Write as _;
use std::path::Path;

use energy_pile::calibration::{fit, FitResult, FitSpec, FreeParameter, Observation, Parameter, SearchMethod};
use energy_pile::fd_oracle::{discrepancy, solve_fd, solve_fd_homogeneous, Discrepancy};
use energy_pile::{HomogeneousCase, LayeredCase, LayeredSolution, LoadCase, ResponseProfile, Sample};

use crate::error::{CliError, Result};
use crate::scenario::Model;

const MPA: f64 = 1e6;

/// Full double precision, 17 significant digits. Negative zero prints as zero.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum SolverChoice {
    /// Closed form for a single layer, layered otherwise.
    #[default]
    Auto,
    Homogeneous,
    Layered,
}

pub enum Solved {
    Homogeneous(HomogeneousCase),
    Layered(LayeredSolution),
}

impl Solved {
    pub fn new(model: &Model, load: LoadCase, choice: SolverChoice) -> Result<Self> {
        let single = model.profile.layers().len() == 1;
        match choice {
            SolverChoice::Auto if single => Self::homogeneous(model, load),
            SolverChoice::Homogeneous if !single => Err(CliError::Usage(format!(
                "the homogeneous solver needs one layer, scenario has {}",
                model.profile.layers().len()
            ))),
            SolverChoice::Homogeneous => Self::homogeneous(model, load),
            _ => Ok(Solved::Layered(LayeredCase::new(model.pile, model.profile.clone(), load)?.solve()?)),
        }
    }

    fn homogeneous(model: &Model, load: LoadCase) -> Result<Self> {
        Ok(Solved::Homogeneous(HomogeneousCase::from_profile(model.pile, &model.profile, load)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Solved::Homogeneous(_) => "homogeneous",
            Solved::Layered(_) => "layered",
        }
    }

    pub fn evaluate(&self, x: f64) -> energy_pile::Result<Sample> {
        match self {
            Solved::Homogeneous(c) => c.evaluate(x),
            Solved::Layered(s) => s.evaluate(x),
        }
    }

    /// `per_layer` samples in each layer, ends included.
    pub fn profile(&self, per_layer: usize) -> Result<ResponseProfile> {
        Ok(match self {
            Solved::Homogeneous(c) => c.sample_profile(per_layer)?,
            Solved::Layered(s) => s.sample_profile(per_layer)?,
        })
    }

    pub fn null_points(&self) -> Vec<f64> {
        match self {
            Solved::Homogeneous(c) => c.null_points(),
            Solved::Layered(s) => s.null_points(),
        }
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Usage(format!("csv output: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

pub const PROFILE_HEADER: [&str; 6] = ["x_m", "depth_m", "u_m", "strain", "stress_pa", "shear_pa"];

/// Profile CSV; each interface appears once for each side.
pub fn solve(model: &Model, case: &str, choice: SolverChoice, per_layer: usize) -> Result<String> {
    let load = model.load(case)?;
    let profile = Solved::new(model, load, choice)?.profile(per_layer)?;
    let l = model.pile.length();
    csv_text(
        &PROFILE_HEADER,
        profile.samples.iter().map(|s| {
            vec![
                num(s.x),
                num(s.depth(l)),
                num(s.displacement),
                num(s.strain),
                num(s.stress),
                num(s.shear),
            ]
        }),
    )
}

pub fn null_point(model: &Model, case: &str, choice: SolverChoice) -> Result<String> {
    let load = model.load(case)?;
    let l = model.pile.length();
    let solved = Solved::new(model, load, choice)?;
    // the thermal zero does not depend on the size of dT
    let thermal = match &solved {
        Solved::Homogeneous(c) => vec![c.null_point()],
        Solved::Layered(_) => Solved::new(model, LoadCase::new(1.0, 0.0)?, choice)?.null_points(),
    };
    let combined = solved.null_points();
    let mut out = String::new();
    let line = |out: &mut String, x: f64| writeln!(out, "  x_m={} depth_m={}", num(x), num(l - x)).unwrap();
    writeln!(out, "case {case} ({} solver)", solved.name()).unwrap();
    writeln!(out, "thermal null points: {}", thermal.len()).unwrap();
    for &x in &thermal {
        line(&mut out, x);
    }
    writeln!(out, "zeros of u under the full load: {}", combined.len()).unwrap();
    for &x in &combined {
        line(&mut out, x);
    }
    Ok(out)
}

/// Head displacement for each temperature change, head force held fixed.
pub fn sweep(model: &Model, case: &str, choice: SolverChoice, delta_ts: &[f64]) -> Result<String> {
    let load = model.load(case)?;
    let l = model.pile.length();
    let heads: Vec<f64> = match Solved::new(model, load, choice)? {
        Solved::Homogeneous(c) => c.head_displacement_series(delta_ts)?,
        Solved::Layered(_) => delta_ts
            .iter()
            .map(|&dt| {
                let step = LoadCase::new(dt, load.head_force)?;
                Ok(Solved::new(model, step, choice)?.evaluate(l)?.displacement)
            })
            .collect::<Result<_>>()?,
    };
    csv_text(
        &["step", "delta_t_c", "u_head_m"],
        delta_ts
            .iter()
            .zip(&heads)
            .enumerate()
            .map(|(i, (&dt, &u))| vec![i.to_string(), num(dt), num(u)]),
    )
}

pub struct OracleReport {
    pub text: String,
    pub discrepancy: Discrepancy,
    pub passed: bool,
}

pub fn oracle_check(model: &Model, case: &str, choice: SolverChoice, n: usize, tolerance: f64) -> Result<OracleReport> {
    let load = model.load(case)?;
    let solved = Solved::new(model, load, choice)?;
    let fd = match &solved {
        Solved::Homogeneous(c) => solve_fd_homogeneous(&model.pile, c.layer(), c.tip(), &load, n)?,
        Solved::Layered(_) => solve_fd(&model.pile, &model.profile, &load, n)?,
    };
    let d = discrepancy(&fd, |x| solved.evaluate(x))?;
    let passed = d.max() <= tolerance;
    let mut text = String::new();
    writeln!(text, "case {case}: {} solver against finite differences, {} nodes", solved.name(), fd.grid.len()).unwrap();
    writeln!(text, "relative L-infinity discrepancy").unwrap();
    writeln!(text, "  u       {}", num(d.displacement)).unwrap();
    writeln!(text, "  strain  {}", num(d.strain)).unwrap();
    writeln!(text, "  stress  {}", num(d.stress)).unwrap();
    writeln!(text, "{} (tolerance {tolerance:e})", if passed { "PASS" } else { "FAIL" }).unwrap();
    Ok(OracleReport {
        text,
        discrepancy: d,
        passed,
    })
}

/// Parses `k_b=LO:HI` or `k_s.LAYER=LO:HI`, bounds in MPa/m.
pub fn parse_free(spec: &str, model: &Model) -> Result<FreeParameter> {
    let usage = || CliError::Usage(format!("free parameter '{spec}' must be k_b=LO:HI or k_s.LAYER=LO:HI (MPa/m)"));
    let (key, range) = spec.split_once('=').ok_or_else(usage)?;
    let (lo, hi) = range.split_once(':').ok_or_else(usage)?;
    let lower: f64 = lo.trim().parse().map_err(|_| usage())?;
    let upper: f64 = hi.trim().parse().map_err(|_| usage())?;
    let parameter = if key == "k_b" {
        Parameter::TipStiffness
    } else if let Some(name) = key.strip_prefix("k_s.") {
        Parameter::ShearStiffness(
            model
                .layer_index(name)
                .ok_or_else(|| CliError::Usage(format!("unknown layer '{name}'; layers: {}", model.layer_names.join(", "))))?,
        )
    } else {
        return Err(usage());
    };
    Ok(FreeParameter {
        parameter,
        lower: lower * MPA,
        upper: upper * MPA,
    })
}

pub fn parameter_label(p: Parameter, model: &Model) -> String {
    match p {
        Parameter::TipStiffness => "k_b_mpa_per_m".into(),
        Parameter::ShearStiffness(i) => format!("k_s_mpa_per_m.{}", model.layer_names[i]),
    }
}

/// Runs the fit with all scenario load cases available to the observations.
pub fn calibrate(
    model: &Model,
    observations: Vec<Observation>,
    free: Vec<FreeParameter>,
    tolerance_mpa: f64,
    max_evaluations: usize,
) -> Result<FitResult> {
    if observations.is_empty() {
        return Err(CliError::Usage("no observations".into()));
    }
    if free.is_empty() {
        return Err(CliError::Usage("at least one --free parameter is required".into()));
    }
    let spec = FitSpec::new(
        model.pile,
        model.profile.clone(),
        model.loads.clone(),
        free,
        observations,
        tolerance_mpa * MPA,
        max_evaluations,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(fit(&spec)?)
}

pub fn fit_report(result: &FitResult, free: &[FreeParameter], model: &Model) -> String {
    let method = match result.method {
        SearchMethod::GoldenSection => "golden-section",
        SearchMethod::GridScan => "grid-scan",
        SearchMethod::NelderMead => "nelder-mead",
    };
    let mut out = String::new();
    writeln!(out, "status {}", if result.converged { "CONVERGED" } else { "NONCONVERGED" }).unwrap();
    writeln!(out, "method {method}").unwrap();
    writeln!(out, "evaluations {}", result.evaluations).unwrap();
    writeln!(out, "objective {}", num(result.objective)).unwrap();
    for (fp, v) in free.iter().zip(&result.params) {
        writeln!(out, "{} {}", parameter_label(fp.parameter, model), num(v / MPA)).unwrap();
    }
    out
}

/// Every evaluation in order: `evaluation,<parameters in MPa/m>,objective`.
pub fn trace_csv(result: &FitResult, free: &[FreeParameter], model: &Model) -> Result<String> {
    let labels: Vec<String> = free.iter().map(|fp| parameter_label(fp.parameter, model)).collect();
    let mut header = vec!["evaluation"];
    header.extend(labels.iter().map(String::as_str));
    header.push("objective");
    csv_text(
        &header,
        result.trace.iter().enumerate().map(|(i, t)| {
            let mut row = vec![(i + 1).to_string()];
            row.extend(t.params.iter().map(|v| num(v / MPA)));
            row.push(num(t.objective));
            row
        }),
    )
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.into(),
        source,
    })
}
