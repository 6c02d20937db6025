//! The four learning models behind one fit/predict contract.

mod linear;
mod normalize;
mod svr;
mod tree;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use linear::{fit_linear, LinearModel, RIDGE_JITTER};
pub use normalize::Normalizer;
pub use svr::{fit_svr, svr_objective, SvrModel, SvrParams};
pub use tree::{fit_tree, Node, TreeModel, TreeParams};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const STAR_MIN: f64 = 1.0;
pub const STAR_MAX: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "svr")]
    Svr,
    #[serde(rename = "svr-n")]
    SvrNormalized,
    #[serde(rename = "tree")]
    Tree,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Linear,
        ModelKind::Svr,
        ModelKind::SvrNormalized,
        ModelKind::Tree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Svr => "svr",
            ModelKind::SvrNormalized => "svr-n",
            ModelKind::Tree => "tree",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "ols" => Ok(ModelKind::Linear),
            "svr" => Ok(ModelKind::Svr),
            "svr-n" | "svr-normalized" | "svrn" => Ok(ModelKind::SvrNormalized),
            "tree" | "cart" => Ok(ModelKind::Tree),
            other => Err(format!(
                "unknown model '{other}' (expected linear, svr, svr-n or tree)"
            )),
        }
    }
}

/// Hyperparameters for every model kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub svr: SvrParams,
    pub tree: TreeParams,
    /// Clamp evaluation predictions to the star range.
    pub clamp: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            svr: SvrParams::default(),
            tree: TreeParams::default(),
            clamp: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum TrainedModel {
    Linear(LinearModel),
    Svr(SvrModel),
    Tree(TreeModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Linear(_) => ModelKind::Linear,
            TrainedModel::Svr(m) if m.normalized => ModelKind::SvrNormalized,
            TrainedModel::Svr(_) => ModelKind::Svr,
            TrainedModel::Tree(_) => ModelKind::Tree,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Linear(m) => m.weights.len(),
            TrainedModel::Svr(m) => m.weights.len(),
            TrainedModel::Tree(m) => m.n_features,
        }
    }

    fn raw(&self, row: &[f64]) -> f64 {
        match self {
            TrainedModel::Linear(m) => m.predict_row(row),
            TrainedModel::Svr(m) => m.predict_row(row),
            TrainedModel::Tree(m) => m.predict_row(row),
        }
    }

    pub fn predict_row(&self, row: &[f64], clamp: bool) -> Result<f64> {
        if row.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: row.len(),
            });
        }
        let v = self.raw(row);
        Ok(if clamp {
            v.clamp(STAR_MIN, STAR_MAX)
        } else {
            v
        })
    }

    /// One prediction per row of `x`; with `clamp`, outputs are limited to the star range.
    pub fn predict(&self, x: &Matrix, clamp: bool) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.cols(),
            });
        }
        Ok(x.iter_rows()
            .map(|row| {
                let v = self.raw(row);
                if clamp {
                    v.clamp(STAR_MIN, STAR_MAX)
                } else {
                    v
                }
            })
            .collect())
    }
}

/// Fit `kind` on `(x, y)`. `seed` drives the SVR row order and overrides the
/// seed in `config`.
pub fn fit_model(
    kind: ModelKind,
    x: &Matrix,
    y: &[f64],
    config: &ModelConfig,
    seed: u64,
) -> Result<TrainedModel> {
    let svr = SvrParams { seed, ..config.svr };
    Ok(match kind {
        ModelKind::Linear => TrainedModel::Linear(fit_linear(x, y)?),
        ModelKind::Svr => TrainedModel::Svr(fit_svr(x, y, &svr, false)?),
        ModelKind::SvrNormalized => TrainedModel::Svr(fit_svr(x, y, &svr, true)?),
        ModelKind::Tree => TrainedModel::Tree(fit_tree(x, y, &config.tree)?),
    })
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained model together with the vocabulary its columns refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub terms: Vec<String>,
    pub model: TrainedModel,
}

impl SavedModel {
    pub fn new(model: TrainedModel, terms: Vec<String>) -> Self {
        SavedModel {
            format_version: MODEL_FORMAT_VERSION,
            kind: model.kind(),
            terms,
            model,
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let saved: SavedModel = serde_json::from_reader(input)?;
        if saved.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::DegenerateInput(format!(
                "unsupported model format version {}",
                saved.format_version
            )));
        }
        if saved.terms.len() != saved.model.n_features() {
            return Err(Error::DimensionMismatch {
                expected: saved.model.n_features(),
                actual: saved.terms.len(),
            });
        }
        Ok(saved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_predictions() {
        let m = TrainedModel::Linear(LinearModel {
            weights: vec![2.0],
            intercept: 1.0,
            ridge: 0.0,
        });
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(m.predict(&x, false).unwrap(), vec![1.0, 3.0]);
        assert_eq!(
            m.predict(&Matrix::zeros(0, 1), true).unwrap(),
            Vec::<f64>::new()
        );
        let far = Matrix::from_rows(&[[-5.0], [10.0]]).unwrap();
        assert_eq!(m.predict(&far, true).unwrap(), vec![1.0, 5.0]);
        assert!(matches!(
            m.predict(&Matrix::zeros(1, 2), false),
            Err(Error::DimensionMismatch {
                expected: 1,
                actual: 2
            })
        ));
    }

    #[test]
    fn kinds_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.name())
            );
        }
        assert!("forest".parse::<ModelKind>().is_err());
    }

    #[test]
    fn every_kind_fits_and_saves() {
        let rows: Vec<[f64; 2]> = (0..30)
            .map(|i| [(i % 6) as f64 / 6.0, (i % 5) as f64 / 5.0])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| 1.0 + 2.0 * r[0] + r[1]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        for kind in ModelKind::ALL {
            let m = fit_model(kind, &x, &y, &ModelConfig::default(), 3).unwrap();
            assert_eq!(m.kind(), kind);
            let saved = SavedModel::new(m.clone(), vec!["a".into(), "b".into()]);
            let mut buf = Vec::new();
            saved.write_json(&mut buf).unwrap();
            let back = SavedModel::read_json(buf.as_slice()).unwrap();
            assert_eq!(
                back.model.predict(&x, true).unwrap(),
                m.predict(&x, true).unwrap()
            );
            assert!(m
                .predict(&x, true)
                .unwrap()
                .iter()
                .all(|v| (STAR_MIN..=STAR_MAX).contains(v)));
        }
    }
}
