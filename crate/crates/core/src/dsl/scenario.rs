//! Scenario documents: a pair of operator families plus the experiment
//! schedule.

use serde::Deserialize;
use thiserror::Error;

use super::expr::{parse_expr, Expr, ParseError};
use crate::linalg::{GeneralMatrix, SymmetricMatrix, Tolerances};

/// One operator of a scenario: per-block entry expressions, or a fixed dense
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Entries(Vec<Vec<Expr>>),
    Dense(SymmetricMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub block_size: usize,
    pub a: OperatorSpec,
    pub h: OperatorSpec,
    /// Truncation block counts, strictly ascending.
    pub dims: Vec<usize>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error(
        "operator {operator} is not symmetric: entry ({row}, {col}) differs from ({col}, {row})"
    )]
    Symmetry {
        operator: &'static str,
        row: usize,
        col: usize,
    },
    #[error("operator {operator} entry ({row}, {col}): {source}")]
    Parse {
        operator: &'static str,
        row: usize,
        col: usize,
        source: ParseError,
    },
    #[error("invalid parameter: {0}")]
    Param(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    block_size: usize,
    #[serde(rename = "A")]
    a: Option<Vec<Vec<String>>>,
    #[serde(rename = "A_dense")]
    a_dense: Option<Vec<Vec<f64>>>,
    #[serde(rename = "H")]
    h: Option<Vec<Vec<String>>>,
    #[serde(rename = "H_dense")]
    h_dense: Option<Vec<Vec<f64>>>,
    dims: Vec<usize>,
    seed: u64,
    tolerances: Option<RawTolerances>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    gap: Option<f64>,
    recon: Option<f64>,
}

pub fn load_scenario(document: &[u8]) -> Result<Scenario, ScenarioError> {
    load_scenario_with_params(document, &[])
}

/// Loads a scenario after substituting each `key` identifier in the entry
/// expressions with `(value)`.
pub fn load_scenario_with_params(
    document: &[u8],
    params: &[(String, String)],
) -> Result<Scenario, ScenarioError> {
    for (key, _) in params {
        if !is_identifier(key) || key == "k" {
            return Err(ScenarioError::Param(format!(
                "'{key}' is not a substitutable identifier"
            )));
        }
    }
    let raw: RawScenario =
        serde_json::from_slice(document).map_err(|e| ScenarioError::Schema(e.to_string()))?;

    if raw.block_size == 0 {
        return Err(ScenarioError::Schema("block_size must be positive".into()));
    }
    if raw.dims.is_empty() {
        return Err(ScenarioError::Schema("dims must be nonempty".into()));
    }
    if raw.dims[0] == 0 {
        return Err(ScenarioError::Schema("dims must be positive".into()));
    }
    if raw.dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScenarioError::Schema(
            "dims must be strictly ascending".into(),
        ));
    }

    let a = operator(raw.a, raw.a_dense, "A", raw.block_size, params)?;
    let h = operator(raw.h, raw.h_dense, "H", raw.block_size, params)?;

    let mut tolerances = Tolerances::default();
    if let Some(t) = raw.tolerances {
        if let Some(gap) = t.gap {
            tolerances.gap = positive(gap, "tolerances.gap")?;
        }
        if let Some(recon) = t.recon {
            tolerances.recon = positive(recon, "tolerances.recon")?;
        }
    }

    Ok(Scenario {
        name: raw.name,
        block_size: raw.block_size,
        a,
        h,
        dims: raw.dims,
        seed: raw.seed,
        tolerances,
    })
}

fn positive(v: f64, field: &str) -> Result<f64, ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ScenarioError::Schema(format!(
            "{field} must be a positive number"
        )))
    }
}

fn operator(
    entries: Option<Vec<Vec<String>>>,
    dense: Option<Vec<Vec<f64>>>,
    name: &'static str,
    block_size: usize,
    params: &[(String, String)],
) -> Result<OperatorSpec, ScenarioError> {
    match (entries, dense) {
        (Some(_), Some(_)) => Err(ScenarioError::Schema(format!(
            "both {name} and {name}_dense given"
        ))),
        (None, None) => Err(ScenarioError::Schema(format!(
            "missing field `{name}` (or `{name}_dense`)"
        ))),
        (Some(rows), None) => expression_operator(rows, name, block_size, params),
        (None, Some(rows)) => dense_operator(rows, name),
    }
}

fn expression_operator(
    rows: Vec<Vec<String>>,
    name: &'static str,
    block_size: usize,
    params: &[(String, String)],
) -> Result<OperatorSpec, ScenarioError> {
    if rows.len() != block_size || rows.iter().any(|r| r.len() != block_size) {
        return Err(ScenarioError::Schema(format!(
            "{name} must be a {block_size}x{block_size} array of expressions"
        )));
    }
    let mut parsed = Vec::with_capacity(block_size);
    for (i, row) in rows.iter().enumerate() {
        let mut out = Vec::with_capacity(block_size);
        for (j, text) in row.iter().enumerate() {
            let text = substitute_params(text, params);
            let e = parse_expr(&text).map_err(|source| ScenarioError::Parse {
                operator: name,
                row: i,
                col: j,
                source,
            })?;
            out.push(e);
        }
        parsed.push(out);
    }
    for (i, row) in parsed.iter().enumerate() {
        for (j, entry) in row.iter().enumerate().skip(i + 1) {
            if entry.fold_constants() != parsed[j][i].fold_constants() {
                return Err(ScenarioError::Symmetry {
                    operator: name,
                    row: i,
                    col: j,
                });
            }
        }
    }
    Ok(OperatorSpec::Entries(parsed))
}

fn dense_operator(rows: Vec<Vec<f64>>, name: &'static str) -> Result<OperatorSpec, ScenarioError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(ScenarioError::Schema(format!(
            "{name}_dense must be a nonempty square array"
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ScenarioError::Schema(format!(
            "{name}_dense has non-finite entries"
        )));
    }
    let m = GeneralMatrix::from_rows(&rows).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    SymmetricMatrix::try_from_exact(m)
        .map(OperatorSpec::Dense)
        .map_err(|e| match e {
            crate::linalg::LinalgError::NotSymmetric { row, col } => ScenarioError::Symmetry {
                operator: name,
                row,
                col,
            },
            other => ScenarioError::Schema(other.to_string()),
        })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Whole-identifier textual substitution.
pub fn substitute_params(text: &str, params: &[(String, String)]) -> String {
    if params.is_empty() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start + c.len_utf8();
            while let Some(&(i, n)) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' {
                    end = i + n.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let ident = &text[start..end];
            match params.iter().find(|(k, _)| k == ident) {
                Some((_, v)) => {
                    out.push('(');
                    out.push_str(v);
                    out.push(')');
                }
                None => out.push_str(ident),
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const INDEFINITE: &str = r#"{
        "name": "t", "block_size": 2,
        "A": [["1","0"],["0","k^2"]],
        "H": [["0","1"],["1","0"]],
        "dims": [2,4,8], "seed": 7
    }"#;

    #[test]
    fn loads_expression_scenario() {
        let s = load_scenario(INDEFINITE.as_bytes()).unwrap();
        assert_eq!(s.block_size, 2);
        assert_eq!(s.dims, vec![2, 4, 8]);
        assert_eq!(s.seed, 7);
        assert_eq!(s.tolerances, Tolerances::default());
        match &s.a {
            OperatorSpec::Entries(e) => assert_eq!(e[1][1], parse_expr("k^2").unwrap()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric_entries() {
        let doc = INDEFINITE.replace(r#"[["0","1"],["1","0"]]"#, r#"[["0","1"],["2","0"]]"#);
        assert_eq!(
            load_scenario(doc.as_bytes()).unwrap_err(),
            ScenarioError::Symmetry {
                operator: "H",
                row: 0,
                col: 1
            }
        );
        // equal after folding is fine
        let doc = INDEFINITE.replace(r#"[["0","1"],["1","0"]]"#, r#"[["0","2-1"],["1","0"]]"#);
        assert!(load_scenario(doc.as_bytes()).is_ok());
    }

    #[test]
    fn rejects_bad_dims_and_fields() {
        let doc = INDEFINITE.replace("[2,4,8]", "[4,4]");
        assert!(matches!(
            load_scenario(doc.as_bytes()),
            Err(ScenarioError::Schema(_))
        ));
        let doc = INDEFINITE.replace("[2,4,8]", "[]");
        assert!(matches!(
            load_scenario(doc.as_bytes()),
            Err(ScenarioError::Schema(_))
        ));
        let doc = INDEFINITE.replace("\"seed\": 7", "\"seed\": 7, \"extra\": 1");
        assert!(matches!(
            load_scenario(doc.as_bytes()),
            Err(ScenarioError::Schema(_))
        ));
        let doc = INDEFINITE.replace(", \"seed\": 7", "");
        assert!(matches!(
            load_scenario(doc.as_bytes()),
            Err(ScenarioError::Schema(_))
        ));
        assert!(matches!(
            load_scenario(b"not json"),
            Err(ScenarioError::Schema(_))
        ));
    }

    #[test]
    fn parse_errors_name_the_entry() {
        let doc = INDEFINITE.replace("k^2", "k^(2*mu)");
        match load_scenario(doc.as_bytes()).unwrap_err() {
            ScenarioError::Parse {
                operator, row, col, ..
            } => assert_eq!((operator, row, col), ("A", 1, 1)),
            other => panic!("{other:?}"),
        }
        let params = vec![("mu".to_string(), "0.25".to_string())];
        let s = load_scenario_with_params(doc.as_bytes(), &params).unwrap();
        match &s.a {
            OperatorSpec::Entries(e) => {
                assert_eq!(crate::dsl::eval_expr(&e[1][1], 4).unwrap(), 2.0)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dense_operators() {
        let doc = r#"{"name":"d","block_size":1,"A_dense":[[1,0],[0,4]],
            "H_dense":[[1,3],[3,-1]],"dims":[1],"seed":0,
            "tolerances":{"gap":1e-9}}"#;
        let s = load_scenario(doc.as_bytes()).unwrap();
        assert_eq!(s.tolerances.gap, 1e-9);
        assert!(matches!(s.h, OperatorSpec::Dense(_)));
        let asym = doc.replace("[[1,3],[3,-1]]", "[[1,3],[2,-1]]");
        assert!(matches!(
            load_scenario(asym.as_bytes()),
            Err(ScenarioError::Symmetry { operator: "H", .. })
        ));
        let both = doc.replace("\"A_dense\"", "\"A\":[[\"1\"]],\"A_dense\"");
        assert!(matches!(
            load_scenario(both.as_bytes()),
            Err(ScenarioError::Schema(_))
        ));
    }

    #[test]
    fn substitution_is_whole_word() {
        let p = vec![("mu".to_string(), "0.5".to_string())];
        assert_eq!(substitute_params("k^(2*mu)+mux", &p), "k^(2*(0.5))+mux");
        assert!(matches!(
            load_scenario_with_params(INDEFINITE.as_bytes(), &[("k".into(), "1".into())]),
            Err(ScenarioError::Param(_))
        ));
    }
}
