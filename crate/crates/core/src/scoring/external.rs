use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::corpus::CharSpan;

/// One row of a predictions file produced by an external model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPrediction {
    pub id: String,
    pub p_consistent: f64,
    #[serde(default)]
    pub support_span: Option<CharSpan>,
    #[serde(default)]
    pub error_span: Option<CharSpan>,
}

/// Load predictions keyed by example id. Rows are numbered from 1.
pub fn load_external_predictions(path: impl AsRef<Path>) -> Result<BTreeMap<String, ExternalPrediction>, ScoringError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let p: ExternalPrediction = serde_json::from_str(&line).map_err(|e| ScoringError::Malformed {
            row,
            message: e.to_string(),
        })?;
        if !(0.0..=1.0).contains(&p.p_consistent) {
            return Err(ScoringError::Malformed {
                row,
                message: format!("p_consistent {} outside [0, 1]", p.p_consistent),
            });
        }
        if out.contains_key(&p.id) {
            return Err(ScoringError::Malformed {
                row,
                message: format!("duplicate id {:?}", p.id),
            });
        }
        out.insert(p.id.clone(), p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(src: &str) -> Result<BTreeMap<String, ExternalPrediction>, ScoringError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        std::fs::write(&path, src).unwrap();
        load_external_predictions(&path)
    }

    #[test]
    fn three_rows() {
        let m = load(concat!(
            r#"{"id":"a","p_consistent":0.9,"support_span":[0,4],"error_span":null}"#, "\n",
            r#"{"id":"b","p_consistent":0.1,"support_span":null,"error_span":[2,3]}"#, "\n",
            r#"{"id":"c","p_consistent":0.5}"#, "\n",
        ))
        .unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m["b"].error_span, Some(CharSpan { start: 2, end: 3 }));
    }

    #[test]
    fn out_of_range_reports_row() {
        let err = load("{\"id\":\"a\",\"p_consistent\":0.2}\n{\"id\":\"b\",\"p_consistent\":1.5}\n").unwrap_err();
        assert!(matches!(err, ScoringError::Malformed { row: 2, .. }), "{err}");
        assert!(matches!(load("not json\n"), Err(ScoringError::Malformed { row: 1, .. })));
    }
}
