//! Observation CSV: `kind,x_m,value_si,weight,case_tag`.

use std::path::Path;

use energy_pile::calibration::{Observation, ObservationKind};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
struct Row {
    kind: String,
    x_m: f64,
    value_si: f64,
    weight: f64,
    case_tag: String,
}

pub fn parse(text: &str, origin: &str) -> Result<Vec<Observation>> {
    let bad = |message: String| CliError::Parse {
        path: origin.into(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let kind = ObservationKind::parse(&row.kind).ok_or_else(|| {
            let names: Vec<&str> = ObservationKind::ALL.iter().map(|k| k.name()).collect();
            bad(format!("unknown kind '{}' (expected one of {})", row.kind, names.join(", ")))
        })?;
        out.push(Observation {
            kind,
            x: row.x_m,
            value: row.value_si,
            weight: row.weight,
            case_tag: row.case_tag,
        });
    }
    if out.is_empty() {
        return Err(bad("no observations".into()));
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<Observation>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.into(),
        source,
    })?;
    parse(&text, &path.display().to_string())
}
