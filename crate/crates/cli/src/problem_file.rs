use std::fs;
use std::io;
use std::path::Path;

use conic_multipliers::{Cone, Problem};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// On-disk problem description.
///
/// Constraint expressions are listed in the cone's coordinate order; PSD
/// blocks take svec coordinates, so off-diagonal entries carry the `√2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub n: usize,
    pub objective: String,
    pub constraints: Vec<String>,
    pub cone: Cone,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_solution: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_multiplier: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => CliError::NotFound(path.display().to_string()),
            _ => CliError::Io {
                path: path.display().to_string(),
                source: e,
            },
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Json {
            path: path.display().to_string(),
            source: e,
        })
    }

    /// Builds the problem, attaching the known solution and multiplier.
    pub fn to_problem(&self) -> Result<Problem, CliError> {
        let constraints: Vec<&str> = self.constraints.iter().map(String::as_str).collect();
        let mut p = Problem::parse(&self.name, self.n, &self.objective, &constraints, self.cone.clone())?;
        if let Some(x) = &self.known_solution {
            p = p.with_known_solution(x.clone())?;
        }
        if let Some(l) = &self.known_multiplier {
            p = p.with_known_multiplier(l.clone())?;
        }
        if let Some(x0) = &self.x0 {
            p.check_point(x0, "x0")?;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_fields() {
        let text = r#"{"name":"c","n":2,"objective":"x1+x2","constraints":["x1^2+x2^2-2"],
                       "cone":{"type":"zero","dim":1},"known_solution":[-1,-1]}"#;
        let f: ProblemFile = serde_json::from_str(text).unwrap();
        let p = f.to_problem().unwrap();
        assert_eq!(p.known_solution(), Some(&[-1.0, -1.0][..]));

        let bad = text.replace("\"n\":2", "\"n\":2,\"extra\":1");
        assert!(serde_json::from_str::<ProblemFile>(&bad).is_err());
    }

    #[test]
    fn expression_errors_carry_offsets() {
        let f = ProblemFile {
            name: "c".into(),
            n: 1,
            objective: "x1 * ".into(),
            constraints: vec![],
            cone: Cone::Zero(0),
            known_solution: None,
            known_multiplier: None,
            x0: None,
            delta: None,
            description: None,
        };
        let err = f.to_problem().unwrap_err().to_string();
        assert!(err.contains("offset 5"), "{err}");
    }
}
