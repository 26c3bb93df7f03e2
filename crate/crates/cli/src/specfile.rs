//! Web specification files.
//!
//! ```toml
//! name = "W4-R3"
//! functions = ["x", "y", "x + y", "x*y"]
//! box = [2.0, 3.0, 4.0, 5.0]
//!
//! [sampling]          # optional
//! seed = 7
//! samples = 24
//! tolerance = 1e-13
//!
//! [[relation]]        # optional, one F_i(t) per function
//! name = "linear"
//! functions = ["t", "t", "-t", "0"]
//! ```

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use webrank_core::expr::parse_with;
use webrank_core::{Expr, SampleBox, Var};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed spec file: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WebSpecFile {
    pub name: String,
    pub functions: Vec<String>,
    #[serde(rename = "box")]
    pub domain: [f64; 4],
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, rename = "relation")]
    pub relations: Vec<RelationSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub name: String,
    pub functions: Vec<String>,
}

/// A parsed and checked spec file, before any sampling configuration.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub file: WebSpecFile,
    pub functions: Vec<Expr>,
    pub domain: SampleBox,
    pub relations: Vec<(String, Vec<Expr>)>,
    /// SHA-256 of the file bytes, hex.
    pub digest: String,
}

fn field_err(field: impl Into<String>, message: impl ToString) -> SpecError {
    SpecError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

pub fn load_webspec(path: &Path) -> Result<LoadedSpec, SpecError> {
    let bytes = std::fs::read(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let mut loaded = parse_webspec(&text)?;
    loaded.digest = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(loaded)
}

pub fn parse_webspec(text: &str) -> Result<LoadedSpec, SpecError> {
    let file: WebSpecFile = toml::from_str(text)?;
    let d = file.functions.len();
    if !(3..=5).contains(&d) {
        return Err(field_err("functions", format!("expected 3 to 5 functions, got {d}")));
    }
    let functions = file
        .functions
        .iter()
        .enumerate()
        .map(|(i, s)| parse_with(s, &[Var::X, Var::Y]).map_err(|e| field_err(format!("functions[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    let [a, b, c, e] = file.domain;
    let domain = SampleBox::new(a, b, c, e).map_err(|e| field_err("box", e))?;
    let mut relations = Vec::new();
    for (r, rel) in file.relations.iter().enumerate() {
        if rel.functions.len() != d {
            return Err(field_err(
                format!("relation[{r}].functions"),
                format!("expected {d} functions, got {}", rel.functions.len()),
            ));
        }
        let fs = rel
            .functions
            .iter()
            .enumerate()
            .map(|(i, s)| {
                parse_with(s, &[Var::T]).map_err(|e| field_err(format!("relation[{r}].functions[{i}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        relations.push((rel.name.clone(), fs));
    }
    Ok(LoadedSpec {
        file,
        functions,
        domain,
        relations,
        digest: String::new(),
    })
}

/// Parse a 1-based permutation like `"2,1,4,3"`.
pub fn parse_order(text: &str, d: usize) -> Result<Vec<usize>, SpecError> {
    let order = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| field_err("--order", e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut seen = vec![false; d];
    if order.len() != d {
        return Err(field_err("--order", format!("expected {d} indices")));
    }
    for &k in &order {
        if k == 0 || k > d || seen[k - 1] {
            return Err(field_err("--order", format!("{text} is not a permutation of 1..{d}")));
        }
        seen[k - 1] = true;
    }
    Ok(order.into_iter().map(|k| k - 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const R3: &str = r#"
name = "W4-R3"
functions = ["x", "y", "x + y", "x*y"]
box = [2.0, 3.0, 4.0, 5.0]

[[relation]]
name = "linear"
functions = ["t", "t", "-t", "0"]
"#;

    #[test]
    fn parses_fixture() {
        let s = parse_webspec(R3).unwrap();
        assert_eq!(s.functions.len(), 4);
        assert_eq!(s.relations.len(), 1);
        assert_eq!(s.domain.x_max, 3.0);
    }

    #[test]
    fn reports_bad_fields() {
        let bad = R3.replace("x*y\"]", "x*\"]");
        let err = parse_webspec(&bad).unwrap_err().to_string();
        assert!(err.contains("functions[3]"), "{err}");
        let bad = R3.replace("[2.0, 3.0, 4.0, 5.0]", "[2.0, 2.0, 4.0, 5.0]");
        assert!(parse_webspec(&bad).unwrap_err().to_string().contains("box"));
        let bad = R3.replace("\"-t\", \"0\"", "\"-t\"");
        assert!(parse_webspec(&bad).unwrap_err().to_string().contains("relation[0]"));
        assert!(matches!(parse_webspec("name = 1"), Err(SpecError::Syntax(_))));
    }

    #[test]
    fn orders() {
        assert_eq!(parse_order("2,1,4,3", 4).unwrap(), vec![1, 0, 3, 2]);
        assert!(parse_order("1,1,2,3", 4).is_err());
        assert!(parse_order("1,2,3", 4).is_err());
        assert!(parse_order("0,1,2,3", 4).is_err());
    }
}
