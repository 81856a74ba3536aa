//! File formats: the JSON design-spec schema, CSV/JSON sample matrices, and
//! piecewise-linear curve tables.
//!
//! Design specs are JSON:
//!
//! ```json
//! {
//!   "variables": [
//!     {"name": "x1", "dist": "uniform", "min": 0, "max": 1},
//!     {"name": "x2", "dist": "normal", "mean": 0, "sd": 1},
//!     {"name": "x3", "dist": "truncnorm", "mean": 0, "sd": 1, "min": -2, "max": 2}
//!   ],
//!   "links": [{"left": 1, "right": 2, "relation": "<"}],
//!   "metadata": {"title": "example"}
//! }
//! ```
//!
//! Link indices are 1-based and must join consecutive variables. Variables
//! may carry an optional `"level"` (a physical coordinate such as a
//! temperature) used by curve emission.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{ConstraintLink, Relation};
use crate::design::{DesignSpec, SpecError, Variable};
use crate::distributions::{DistError, Distribution, WireParts};
use crate::sampling::SampleMatrix;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Distribution { path: String, source: DistError },
    #[error("links[{index}]: indices are 1-based, 0 is not a variable")]
    ZeroLinkIndex { index: usize },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Samples(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("levels must be strictly increasing, offense at position {position}")]
    LevelsNotIncreasing { position: usize },
    #[error("levels and values differ in length ({levels} vs {values})")]
    LengthMismatch { levels: usize, values: usize },
    #[error("need at least two levels to interpolate")]
    TooFewLevels,
    #[error("query {query} outside the level range [{lo}, {hi}]; extrapolation is not supported")]
    QueryOutOfRange { query: f64, lo: f64, hi: f64 },
    #[error("variable {name} has no level; curve emission needs one per variable")]
    MissingLevel { name: String },
}

// ---------------------------------------------------------------------------
// design-spec schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SpecFile {
    variables: Vec<VariableWire>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    links: Vec<LinkWire>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct VariableWire {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<f64>,
    #[serde(flatten)]
    dist: DistWire,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
enum DistWire {
    Uniform { min: f64, max: f64 },
    Normal { mean: f64, sd: f64 },
    Truncnorm { mean: f64, sd: f64, min: f64, max: f64 },
}

#[derive(Serialize, Deserialize)]
struct LinkWire {
    left: usize,
    right: usize,
    relation: RelationWire,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum RelationWire {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

impl From<RelationWire> for Relation {
    fn from(w: RelationWire) -> Self {
        match w {
            RelationWire::Less => Relation::StrictlyLess,
            RelationWire::Greater => Relation::StrictlyGreater,
        }
    }
}

impl From<Relation> for RelationWire {
    fn from(r: Relation) -> Self {
        match r {
            Relation::StrictlyLess => RelationWire::Less,
            Relation::StrictlyGreater => RelationWire::Greater,
        }
    }
}

fn build_dist(wire: DistWire, path: &str) -> Result<Distribution, FormatError> {
    let built = match wire {
        DistWire::Uniform { min, max } => Distribution::uniform(min, max),
        DistWire::Normal { mean, sd } => Distribution::normal(mean, sd),
        DistWire::Truncnorm { mean, sd, min, max } => {
            Distribution::truncated_normal(mean, sd, min, max)
        }
    };
    built.map_err(|source| FormatError::Distribution { path: path.to_string(), source })
}

/// Parses and fully validates a design-spec file.
pub fn parse_design_spec(text: &str) -> Result<DesignSpec, FormatError> {
    let file: SpecFile = serde_json::from_str(text)?;
    let mut variables = Vec::with_capacity(file.variables.len());
    for (i, vw) in file.variables.into_iter().enumerate() {
        let dist = build_dist(vw.dist, &format!("variables[{i}]"))?;
        variables.push(match vw.level {
            Some(level) => Variable::with_level(vw.name, dist, level),
            None => Variable::new(vw.name, dist),
        });
    }
    let mut links = Vec::with_capacity(file.links.len());
    for (i, lw) in file.links.into_iter().enumerate() {
        if lw.left == 0 || lw.right == 0 {
            return Err(FormatError::ZeroLinkIndex { index: i });
        }
        if lw.right != lw.left + 1 {
            return Err(SpecError::NonConsecutiveLink { left: lw.left, right: lw.right }.into());
        }
        links.push(ConstraintLink::new(lw.left - 1, lw.relation.into()));
    }
    Ok(DesignSpec::with_metadata(variables, links, file.metadata)?)
}

/// Serializes a design back to the JSON schema `parse_design_spec` reads.
pub fn serialize_design_spec(spec: &DesignSpec) -> String {
    let variables = spec
        .variables()
        .iter()
        .map(|v| {
            let dist = match v.dist().wire_parts() {
                WireParts::Uniform { min, max } => DistWire::Uniform { min, max },
                WireParts::Normal { mean, sd } => DistWire::Normal { mean, sd },
                WireParts::TruncNorm { mean, sd, min, max } => {
                    DistWire::Truncnorm { mean, sd, min, max }
                }
            };
            VariableWire { name: v.name().to_string(), level: v.level(), dist }
        })
        .collect();
    let links = spec
        .links()
        .iter()
        .map(|l| LinkWire {
            left: l.left_index() + 1,
            right: l.right_index() + 1,
            relation: l.relation().into(),
        })
        .collect();
    let file = SpecFile { variables, links, metadata: spec.metadata().clone() };
    serde_json::to_string_pretty(&file).expect("spec serialization cannot fail")
}

// ---------------------------------------------------------------------------
// sample matrices
// ---------------------------------------------------------------------------

/// Output encoding for sample matrices. JSON carries the generator seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    Json { seed: u64 },
}

#[derive(Serialize, Deserialize)]
struct SamplesJson {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
    seed: u64,
}

/// 17 significant decimal digits: enough for an exact f64 round trip.
fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Encodes a sample matrix. CSV is a header of variable names followed by
/// one row per experiment; values round-trip bit-exactly.
pub fn write_samples(m: &SampleMatrix, format: SampleFormat) -> String {
    match format {
        SampleFormat::Csv => {
            let mut out = String::new();
            out.push_str(&m.variable_names().join(","));
            out.push('\n');
            for i in 0..m.n() {
                let row: Vec<String> =
                    (0..m.p()).map(|j| format_value(m.value(i, j))).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        SampleFormat::Json { seed } => {
            let rows = (0..m.n()).map(|i| m.row(i)).collect();
            let doc = SamplesJson { names: m.variable_names().to_vec(), rows, seed };
            let mut s =
                serde_json::to_string_pretty(&doc).expect("sample serialization cannot fail");
            s.push('\n');
            s
        }
    }
}

fn parse_value(field: &str, line: usize) -> Result<f64, FormatError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| FormatError::Samples(format!("line {line}: {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(FormatError::Samples(format!("line {line}: non-finite value {field:?}")));
    }
    Ok(v)
}

/// Reads a CSV sample matrix written by [`write_samples`].
pub fn read_samples_csv(text: &str) -> Result<SampleMatrix, FormatError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FormatError::Samples("empty file".to_string()))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let p = names.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != p {
            return Err(FormatError::Samples(format!(
                "line {}: expected {p} fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        for (j, field) in fields.iter().enumerate() {
            columns[j].push(parse_value(field, lineno + 2)?);
        }
    }
    Ok(SampleMatrix::from_columns(names, columns))
}

/// Reads a JSON sample matrix; returns the matrix and the recorded seed.
pub fn read_samples_json(text: &str) -> Result<(SampleMatrix, u64), FormatError> {
    let doc: SamplesJson = serde_json::from_str(text)?;
    let p = doc.names.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    for (i, row) in doc.rows.iter().enumerate() {
        if row.len() != p {
            return Err(FormatError::Samples(format!(
                "row {i}: expected {p} values, found {}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(FormatError::Samples(format!("row {i}: non-finite value")));
            }
            columns[j].push(v);
        }
    }
    Ok((SampleMatrix::from_columns(doc.names, columns), doc.seed))
}

/// Reads a sample matrix in either encoding, sniffing JSON by its leading
/// brace. The seed is `None` for CSV input.
pub fn read_samples_auto(text: &str) -> Result<(SampleMatrix, Option<u64>), FormatError> {
    if text.trim_start().starts_with('{') {
        let (m, seed) = read_samples_json(text)?;
        Ok((m, Some(seed)))
    } else {
        Ok((read_samples_csv(text)?, None))
    }
}

// ---------------------------------------------------------------------------
// piecewise-linear curves
// ---------------------------------------------------------------------------

fn check_levels(levels: &[f64]) -> Result<(), CurveError> {
    if levels.len() < 2 {
        return Err(CurveError::TooFewLevels);
    }
    for (i, pair) in levels.windows(2).enumerate() {
        if !(pair[0] < pair[1]) {
            return Err(CurveError::LevelsNotIncreasing { position: i + 1 });
        }
    }
    Ok(())
}

/// Value of the piecewise-linear curve through `(levels[k], values[k])` at
/// `query`. Exact at knots; refuses to extrapolate.
pub fn interpolate_curve(levels: &[f64], values: &[f64], query: f64) -> Result<f64, CurveError> {
    check_levels(levels)?;
    if levels.len() != values.len() {
        return Err(CurveError::LengthMismatch { levels: levels.len(), values: values.len() });
    }
    let (lo, hi) = (levels[0], levels[levels.len() - 1]);
    if !(query >= lo && query <= hi) {
        return Err(CurveError::QueryOutOfRange { query, lo, hi });
    }
    if let Some(k) = levels.iter().position(|&l| l == query) {
        return Ok(values[k]);
    }
    let seg = levels.partition_point(|&l| l < query) - 1;
    let t = (query - levels[seg]) / (levels[seg + 1] - levels[seg]);
    Ok(values[seg] + t * (values[seg + 1] - values[seg]))
}

/// Sampled curves evaluated on a common grid of levels: one row per
/// experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub levels: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads each sample row as a curve over the design's variable levels and
/// evaluates it at `queries`.
pub fn curve_table(
    m: &SampleMatrix,
    spec: &DesignSpec,
    queries: &[f64],
) -> Result<CurveTable, CurveError> {
    let knots: Vec<f64> = spec
        .variables()
        .iter()
        .map(|v| v.level().ok_or_else(|| CurveError::MissingLevel { name: v.name().to_string() }))
        .collect::<Result<_, _>>()?;
    check_levels(&knots)?;
    check_levels(queries).or_else(|e| match e {
        // a single query level is fine
        CurveError::TooFewLevels if queries.len() == 1 => Ok(()),
        other => Err(other),
    })?;
    let rows = (0..m.n())
        .map(|i| {
            let values = m.row(i);
            queries.iter().map(|&q| interpolate_curve(&knots, &values, q)).collect()
        })
        .collect::<Result<Vec<Vec<f64>>, CurveError>>()?;
    Ok(CurveTable { levels: queries.to_vec(), rows })
}

/// CSV encoding of a curve table: a `level:<value>` header, one curve per row.
pub fn write_curve_csv(table: &CurveTable) -> String {
    let mut out = String::new();
    let header: Vec<String> = table.levels.iter().map(|l| format!("level:{l}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{lhs, RngState};

    const FIG3A: &str = r#"{
        "variables": [
            {"name": "x1", "dist": "uniform", "min": 0, "max": 1},
            {"name": "x2", "dist": "uniform", "min": 0, "max": 2}
        ],
        "links": [{"left": 1, "right": 2, "relation": "<"}]
    }"#;

    #[test]
    fn parses_two_variable_spec() {
        let spec = parse_design_spec(FIG3A).unwrap();
        assert_eq!(spec.variables().len(), 2);
        assert_eq!(spec.links().len(), 1);
        assert_eq!(spec.links()[0].relation(), Relation::StrictlyLess);
    }

    #[test]
    fn rejects_non_consecutive_link() {
        let text = r#"{
            "variables": [
                {"name": "a", "dist": "uniform", "min": 0, "max": 1},
                {"name": "b", "dist": "uniform", "min": 0, "max": 1},
                {"name": "c", "dist": "uniform", "min": 0, "max": 2}
            ],
            "links": [{"left": 1, "right": 3, "relation": "<"}]
        }"#;
        let err = parse_design_spec(text).unwrap_err();
        assert!(err.to_string().contains("consecutive"), "{err}");
    }

    #[test]
    fn rejects_bound_violation_with_inequality_named() {
        let text = r#"{
            "variables": [
                {"name": "x1", "dist": "uniform", "min": 0, "max": 2},
                {"name": "x2", "dist": "uniform", "min": 0, "max": 1}
            ],
            "links": [{"left": 1, "right": 2, "relation": "<"}]
        }"#;
        let err = parse_design_spec(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("upper(left) <= upper(right)"), "{msg}");
    }

    #[test]
    fn rejects_unknown_distribution_kind() {
        let text = r#"{"variables": [{"name": "x", "dist": "weibull", "min": 0, "max": 1}]}"#;
        let err = parse_design_spec(text).unwrap_err();
        assert!(matches!(err, FormatError::Json(_)));
        assert!(err.to_string().contains("unknown variant"), "{err}");
    }

    #[test]
    fn spec_round_trip_is_lossless() {
        let text = r#"{
            "variables": [
                {"name": "x1", "dist": "uniform", "min": 0.125, "max": 1.75, "level": 20},
                {"name": "x2", "dist": "truncnorm", "mean": 1.5, "sd": 0.8, "min": 0.5, "max": 3.0, "level": 200}
            ],
            "links": [{"left": 1, "right": 2, "relation": "<"}],
            "metadata": {"title": "roundtrip", "units": "GPa"}
        }"#;
        let spec = parse_design_spec(text).unwrap();
        let again = parse_design_spec(&serialize_design_spec(&spec)).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn csv_tiny_matrix_layout() {
        let m = SampleMatrix::from_columns(vec!["x1".into()], vec![vec![0.5]]);
        let text = write_samples(&m, SampleFormat::Csv);
        assert_eq!(text, "x1\n5.0000000000000000e-1\n");
    }

    #[test]
    fn csv_round_trip_bit_exact() {
        let spec = parse_design_spec(FIG3A).unwrap();
        let m = lhs(&spec, 64, &RngState::new(2)).unwrap();
        let back = read_samples_csv(&write_samples(&m, SampleFormat::Csv)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn json_round_trip_keeps_seed() {
        let spec = parse_design_spec(FIG3A).unwrap();
        let m = lhs(&spec, 16, &RngState::new(99)).unwrap();
        let (back, seed) =
            read_samples_json(&write_samples(&m, SampleFormat::Json { seed: 99 })).unwrap();
        assert_eq!(m, back);
        assert_eq!(seed, 99);
    }

    #[test]
    fn six_by_two_has_six_data_rows() {
        let names = vec!["x1".to_string(), "x2".to_string()];
        let cols = vec![vec![1.0; 6], vec![2.0; 6]];
        let text = write_samples(&SampleMatrix::from_columns(names, cols), SampleFormat::Csv);
        assert_eq!(text.lines().count(), 7); // header + 6 rows
    }

    #[test]
    fn interpolation_basics() {
        assert_eq!(interpolate_curve(&[0.0, 1.0], &[0.0, 2.0], 0.5).unwrap(), 1.0);
        // knots are exact
        assert_eq!(interpolate_curve(&[0.0, 1.0, 3.0], &[5.0, -1.0, 7.0], 1.0).unwrap(), -1.0);
        assert!(matches!(
            interpolate_curve(&[0.0, 1.0], &[0.0, 2.0], 1.5),
            Err(CurveError::QueryOutOfRange { .. })
        ));
        assert!(matches!(
            interpolate_curve(&[0.0, 0.0], &[0.0, 2.0], 0.0),
            Err(CurveError::LevelsNotIncreasing { .. })
        ));
    }

    #[test]
    fn welding_style_segment_query() {
        // seven levels spanning 20..1100; the query sits on the 600..800 segment
        let levels = [20.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 1100.0];
        let values = [210.0, 195.0, 170.0, 140.0, 90.0, 45.0, 20.0];
        let got = interpolate_curve(&levels, &values, 560.0).unwrap();
        let expected = 170.0 + (560.0 - 400.0) / 200.0 * (140.0 - 170.0);
        assert_eq!(got, expected);
        assert!(got < 170.0 && got > 140.0);
    }

    #[test]
    fn curve_table_uses_variable_levels() {
        let text = r#"{
            "variables": [
                {"name": "e20", "dist": "uniform", "min": 10, "max": 20, "level": 20},
                {"name": "e400", "dist": "uniform", "min": 5, "max": 15, "level": 400},
                {"name": "e1100", "dist": "uniform", "min": 0, "max": 10, "level": 1100}
            ]
        }"#;
        let spec = parse_design_spec(text).unwrap();
        let m = lhs(&spec, 3, &RngState::new(8)).unwrap();
        let table = curve_table(&m, &spec, &[20.0, 210.0, 400.0, 1100.0]).unwrap();
        assert_eq!(table.rows.len(), 3);
        for (i, row) in table.rows.iter().enumerate() {
            assert_eq!(row.len(), 4);
            assert_eq!(row[0], m.value(i, 0)); // knot queries reproduce the sample
            assert_eq!(row[2], m.value(i, 1));
        }
        let csv = write_curve_csv(&table);
        assert!(csv.starts_with("level:20,level:210,level:400,level:1100\n"));
    }

    #[test]
    fn curve_table_needs_levels() {
        let spec = parse_design_spec(FIG3A).unwrap();
        let m = lhs(&spec, 2, &RngState::new(8)).unwrap();
        assert!(matches!(
            curve_table(&m, &spec, &[0.5]),
            Err(CurveError::MissingLevel { .. })
        ));
    }
}
