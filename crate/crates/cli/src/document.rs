//! The JSON system document: `{"A": [[..]], "B": [[..]] | "b21": x, "torus": {"R", "r"}}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use torus_filippov::{
    derive_inelastic_b, is_inelastic, LinearField, Matrix, PiecewiseSystem, TorusSpec,
};

use crate::{CliError, Result};

pub type Rows = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusDoc {
    #[serde(rename = "R")]
    pub major: f64,
    #[serde(rename = "r")]
    pub minor: f64,
}

impl Default for TorusDoc {
    fn default() -> Self {
        Self {
            major: 2.0,
            minor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b21: Option<f64>,
    #[serde(default)]
    pub torus: TorusDoc,
}

pub fn to_matrix(rows: &Rows) -> Matrix {
    Matrix::from_fn(|i, j| rows[i][j])
}

pub fn to_rows(m: &Matrix) -> Rows {
    LinearField(*m).rows()
}

impl SystemDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed system document: {e}")))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = read_input(path)?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Input(format!("{}: not UTF-8 text", path.display())))?;
        let doc = Self::parse(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok((doc, bytes))
    }

    pub fn torus(&self) -> Result<TorusSpec> {
        Ok(TorusSpec::new(self.torus.major, self.torus.minor)?)
    }

    /// The piecewise system; an explicit `B` must make the pair inelastic
    /// unless `allow_non_inelastic` is set.
    pub fn to_system(&self, allow_non_inelastic: bool) -> Result<PiecewiseSystem> {
        let torus = self.torus()?;
        let a = to_matrix(&self.a);
        match (self.b, self.b21) {
            (Some(b), b21) => {
                if let Some(b21) = b21 {
                    if b21 != b[1][0] {
                        return Err(CliError::Input(format!(
                            "\"b21\" = {b21} disagrees with B[2][1] = {}",
                            b[1][0]
                        )));
                    }
                }
                let sys = PiecewiseSystem::new(LinearField(to_matrix(&b)), LinearField(a), torus);
                if !allow_non_inelastic && !is_inelastic(&sys) {
                    return Err(CliError::Input(
                        "the given B does not make the pair inelastic over the torus \
                         (use --allow-non-inelastic to load it anyway)"
                            .into(),
                    ));
                }
                Ok(sys)
            }
            (None, Some(b21)) => Ok(PiecewiseSystem::inelastic(a, b21, torus)),
            (None, None) => Err(CliError::Input(
                "system document needs either \"B\" or \"b21\"".into(),
            )),
        }
    }

    /// The same document with `B` filled in from `A` and `b21`.
    pub fn with_derived_b(&self) -> Result<Self> {
        let b21 = self
            .b21
            .ok_or_else(|| CliError::Input("missing field `b21`".into()))?;
        self.torus()?;
        let b = derive_inelastic_b(&to_matrix(&self.a), b21);
        Ok(Self {
            a: self.a,
            b: Some(to_rows(&b)),
            b21: Some(b21),
            torus: self.torus,
        })
    }
}

pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Requires the inelastic constraint for commands that depend on it.
pub fn require_inelastic(sys: &PiecewiseSystem) -> Result<()> {
    if is_inelastic(sys) {
        Ok(())
    } else {
        Err(CliError::Input(
            "this command needs an inelastic system; --allow-non-inelastic only enables region maps"
                .into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_derivation() {
        let doc = SystemDocument::parse(r#"{"A": [[1,2,3],[4,5,6],[7,8,9]], "b21": -1}"#).unwrap();
        assert_eq!(doc.torus, TorusDoc::default());
        let full = doc.with_derived_b().unwrap();
        assert_eq!(full.b.unwrap(), [[-1.0, -5.0, -3.0], [-1.0, -5.0, -6.0], [-7.0, -8.0, -9.0]]);
        let sys = full.to_system(false).unwrap();
        assert_eq!(sys.omega(), 1.5);
    }

    #[test]
    fn explicit_b_round_trips() {
        let doc = SystemDocument::parse(r#"{"A": [[1,2,3],[4,5,6],[7,8,9]], "b21": 0.25}"#).unwrap();
        let full = doc.with_derived_b().unwrap();
        let reloaded = SystemDocument {
            b21: None,
            ..full.clone()
        };
        let again = SystemDocument {
            b: None,
            b21: Some(reloaded.b.unwrap()[1][0]),
            ..reloaded.clone()
        }
        .with_derived_b()
        .unwrap();
        assert_eq!(again.b, reloaded.b);
    }

    #[test]
    fn rejections() {
        let missing = SystemDocument::parse(r#"{"b21": 0}"#).unwrap_err();
        assert!(missing.to_string().contains("missing field `A`"));
        let neither = SystemDocument::parse(r#"{"A": [[0,0,0],[0,0,0],[0,0,0]]}"#).unwrap();
        assert!(neither.to_system(false).is_err());
        let elastic =
            SystemDocument::parse(r#"{"A": [[1,0,0],[0,1,0],[0,0,1]], "B": [[1,0,0],[0,1,0],[0,0,1]]}"#)
                .unwrap();
        assert!(elastic.to_system(false).is_err());
        assert!(elastic.to_system(true).is_ok());
        let bad_torus =
            SystemDocument::parse(r#"{"A": [[0,0,0],[0,0,0],[0,0,0]], "b21": 0, "torus": {"R": 1, "r": 2}}"#)
                .unwrap();
        assert!(bad_torus.to_system(false).is_err());
    }
}
