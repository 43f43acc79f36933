//! Portfolio CSV and factor sidecar ingestion.
//!
//! CSV schema (header required): `id,exposure,ttc_pd,rho,w1[,w2,...]`.
//! Factor sidecar: `{"k": 1, "cov": [[1.0]]}`; identity when absent.

use std::collections::HashMap;
use std::path::Path;

use pitcap_core::{validate_portfolio, FactorModel, Obligor, Portfolio, Violation};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

const FIXED_COLUMNS: [&str; 4] = ["id", "exposure", "ttc_pd", "rho"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorFile {
    k: usize,
    cov: Vec<Vec<f64>>,
}

pub fn load_factors(path: &Path) -> CliResult<FactorModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read factor file {}: {e}", path.display())))?;
    let f: FactorFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if f.k == 0 || f.cov.len() != f.k || f.cov.iter().any(|r| r.len() != f.k) {
        return Err(CliError::Parse(format!(
            "{}: cov must be a {k} x {k} matrix",
            path.display(),
            k = f.k
        )));
    }
    FactorModel::new(f.cov).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub normalize_exposures: bool,
    pub normalize_weights: bool,
}

/// Reads and validates a portfolio; violations are reported with their CSV line.
pub fn load_portfolio(path: &Path, factors: Option<&Path>, opts: LoadOptions) -> CliResult<Portfolio> {
    let (portfolio, lines) = read_portfolio(path, factors, opts)?;
    let report = validate_portfolio(&portfolio);
    if report.is_valid() {
        return Ok(portfolio);
    }
    let messages = report
        .violations
        .iter()
        .map(|v| match obligor_id(v).and_then(|id| lines.get(id)) {
            Some(line) => format!("{}: line {line}: {v}", path.display()),
            None => format!("{}: {v}", path.display()),
        })
        .collect();
    Err(CliError::Validation(messages))
}

fn obligor_id(v: &Violation) -> Option<&str> {
    match v {
        Violation::NonPositiveExposure { id, .. }
        | Violation::PdOutOfRange { id, .. }
        | Violation::SensitivityOutOfRange { id, .. }
        | Violation::FactorDimension { id, .. }
        | Violation::WeightNormalization { id, .. } => Some(id),
        Violation::Empty | Violation::ExposureSum { .. } => None,
    }
}

/// Parses without validating; returns the portfolio and the CSV line of each id.
pub fn read_portfolio(
    path: &Path,
    factors: Option<&Path>,
    opts: LoadOptions,
) -> CliResult<(Portfolio, HashMap<String, u64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot open portfolio {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(CliError::Parse(format!("{}: empty file, expected a header row", path.display())));
    }
    check_header(path, &headers)?;
    let k = headers.len() - FIXED_COLUMNS.len();

    let factor_model = match factors {
        Some(f) => load_factors(f)?,
        None => FactorModel::identity(k),
    };
    if factor_model.k() != k {
        return Err(CliError::Config(format!(
            "{} has {k} weight column(s) but the factor model has k = {}",
            path.display(),
            factor_model.k()
        )));
    }

    let mut obligors = Vec::new();
    let mut lines = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> CliResult<f64> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                CliError::Parse(format!(
                    "{}: line {line}, field {}: cannot parse {raw:?} as a number",
                    path.display(),
                    &headers[i]
                ))
            })
        };
        let id = record.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(CliError::Parse(format!("{}: line {line}, field id: empty", path.display())));
        }
        let weights = (FIXED_COLUMNS.len()..headers.len()).map(field).collect::<CliResult<Vec<f64>>>()?;
        let obligor = Obligor::new(id.clone(), field(1)?, field(2)?, field(3)?, weights);
        if lines.insert(id.clone(), line).is_some() {
            return Err(CliError::Parse(format!(
                "{}: line {line}: duplicate obligor id {id:?}",
                path.display()
            )));
        }
        obligors.push(obligor);
    }
    if obligors.is_empty() {
        return Err(CliError::Parse(format!("{}: no obligor rows", path.display())));
    }

    let mut portfolio = Portfolio::from_parts(obligors, factor_model);
    if opts.normalize_exposures {
        portfolio.normalize_exposures();
    }
    if opts.normalize_weights {
        portfolio.normalize_weights();
    }
    Ok((portfolio, lines))
}

fn check_header(path: &Path, headers: &csv::StringRecord) -> CliResult<()> {
    let bad = |msg: String| CliError::Parse(format!("{}: header: {msg}", path.display()));
    if headers.len() <= FIXED_COLUMNS.len() {
        return Err(bad(format!(
            "expected id,exposure,ttc_pd,rho,w1[,w2,...], got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    for (i, want) in FIXED_COLUMNS.iter().enumerate() {
        if &headers[i] != *want {
            return Err(bad(format!("column {} must be {want}, got {:?}", i + 1, &headers[i])));
        }
    }
    for (j, name) in headers.iter().skip(FIXED_COLUMNS.len()).enumerate() {
        if name != format!("w{}", j + 1) {
            return Err(bad(format!("weight column {} must be w{}, got {name:?}", j + 1, j + 1)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_a_valid_file() {
        let f = write("id,exposure,ttc_pd,rho,w1\na,0.5,0.01,0.3,1\nb,0.5,0.02,0.3,1\n");
        let p = load_portfolio(f.path(), None, LoadOptions::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.obligors()[1].ttc_pd, 0.02);
    }

    #[test]
    fn names_the_offending_line() {
        let f = write("id,exposure,ttc_pd,rho,w1\na,0.5,0.01,0.3,1\nb,0.5,1.5,0.3,1\n");
        let err = load_portfolio(f.path(), None, LoadOptions::default()).unwrap_err();
        let CliError::Validation(msgs) = err else { panic!("expected validation error") };
        assert!(msgs[0].contains("line 3") && msgs[0].contains("ttc_pd 1.5"), "{msgs:?}");
    }

    #[test]
    fn parse_errors() {
        for text in ["", "id,exposure,ttc_pd,rho,w1\n", "id,exposure,pd,rho,w1\na,1,0.1,0.2,1\n"] {
            let f = write(text);
            let err = load_portfolio(f.path(), None, LoadOptions::default()).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text:?}: {err}");
        }
        let f = write("id,exposure,ttc_pd,rho,w1\na,1,abc,0.2,1\n");
        let err = load_portfolio(f.path(), None, LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("line 2, field ttc_pd"), "{err}");
    }

    #[test]
    fn normalization_is_opt_in() {
        let f = write("id,exposure,ttc_pd,rho,w1\na,2,0.01,0.3,1\nb,2,0.02,0.3,1\n");
        assert!(load_portfolio(f.path(), None, LoadOptions::default()).is_err());
        let opts = LoadOptions {
            normalize_exposures: true,
            ..LoadOptions::default()
        };
        let p = load_portfolio(f.path(), None, opts).unwrap();
        assert_eq!(p.obligors()[0].exposure, 0.5);
    }

    #[test]
    fn factor_sidecar() {
        let fac = write(r#"{"k":2,"cov":[[1.0,0.3],[0.3,1.0]]}"#);
        let f = write("id,exposure,ttc_pd,rho,w1,w2\na,1,0.01,0.3,1,0\n");
        let p = load_portfolio(f.path(), Some(fac.path()), LoadOptions::default()).unwrap();
        assert_eq!(p.factor_model().k(), 2);
        let one = write(r#"{"k":1,"cov":[[1.0]]}"#);
        let err = load_portfolio(f.path(), Some(one.path()), LoadOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
