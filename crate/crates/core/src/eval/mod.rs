//! Cross-validated evaluation: RMSE, fold plans, the experiment grid and its reports.

mod grid;
mod report;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use grid::{run_grid, GridSpec, DEFAULT_KS};
pub use report::{report, write_outputs, BestRow, Report, ReportMetadata, Series, LEAKAGE_NOTE};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureMethod};
use crate::par::{self, Execution};
use crate::regress::{fit_model, ModelConfig, ModelKind};
use crate::text::StopwordPolicy;

pub const FOLDS: usize = 10;

/// `√(Σ (y_j − ŷ_j)² / n)`.
pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sse: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

/// A business-level partition of `0..n` into [`FOLDS`] test sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub n: usize,
    /// Test indices of each fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    /// Every index not in fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        let mut in_test = vec![false; self.n];
        for &i in &self.folds[f] {
            in_test[i] = true;
        }
        (0..self.n).filter(|&i| !in_test[i]).collect()
    }

    pub fn test_indices(&self, f: usize) -> &[usize] {
        &self.folds[f]
    }
}

/// Shuffle `0..n` with `seed` and deal the indices round-robin into ten folds.
pub fn make_folds(n: usize, seed: u64) -> Result<FoldPlan> {
    if n < FOLDS {
        return Err(Error::TooFewBusinesses { n, folds: FOLDS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds: Vec<Vec<usize>> = (0..FOLDS)
        .map(|_| Vec::with_capacity(n / FOLDS + 1))
        .collect();
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % FOLDS].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { seed, n, folds })
}

/// Seed handed to the model fitted on fold `fold`.
pub fn fold_seed(plan_seed: u64, fold: usize) -> u64 {
    plan_seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Provenance carried by every result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultMetadata {
    pub corpus_hash: String,
    pub fold_seed: u64,
    pub stopwords: StopwordPolicy,
    pub stopwords_hash: String,
    pub lexicon_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub method: FeatureMethod,
    pub model: ModelKind,
    /// Requested vocabulary size.
    pub k: usize,
    /// Terms actually available, at most `k`.
    pub vocabulary_size: usize,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
    /// Seconds spent fitting and predicting across all folds.
    pub wall_time: f64,
    pub metadata: ResultMetadata,
}

impl ExperimentResult {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &ExperimentResult) -> bool {
        ExperimentResult {
            wall_time: other.wall_time,
            ..self.clone()
        } == *other
    }
}

/// Ten-fold cross-validation of `kind` on `matrix`, folds run in parallel.
/// Predictions are clamped to the star range unless `config.clamp` is off.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    kind: ModelKind,
    config: &ModelConfig,
    plan: &FoldPlan,
) -> Result<ExperimentResult> {
    cross_validate_with(matrix, kind, config, plan, Execution::default())
}

pub fn cross_validate_with(
    matrix: &FeatureMatrix,
    kind: ModelKind,
    config: &ModelConfig,
    plan: &FoldPlan,
    execution: Execution,
) -> Result<ExperimentResult> {
    if plan.n != matrix.n() {
        return Err(Error::LengthMismatch {
            left: plan.n,
            right: matrix.n(),
        });
    }
    let start = Instant::now();
    let fold_ids: Vec<usize> = (0..plan.folds.len()).collect();
    let fold_rmse = par::try_map(execution, &fold_ids, |&f| {
        fold_rmse(matrix, kind, config, plan, f).map_err(|e| e.in_fold(f))
    })?;
    let wall_time = start.elapsed().as_secs_f64();
    let mean_rmse = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
    Ok(ExperimentResult {
        method: matrix.vocabulary.method,
        model: kind,
        k: matrix.vocabulary.k,
        vocabulary_size: matrix.vocabulary.len(),
        fold_rmse,
        mean_rmse,
        wall_time,
        metadata: ResultMetadata {
            corpus_hash: matrix.metadata.corpus_hash.clone(),
            fold_seed: plan.seed,
            stopwords: matrix.metadata.stopwords,
            stopwords_hash: matrix.metadata.stopwords_hash.clone(),
            lexicon_hash: matrix.metadata.lexicon_hash.clone(),
        },
    })
}

fn fold_rmse(
    matrix: &FeatureMatrix,
    kind: ModelKind,
    config: &ModelConfig,
    plan: &FoldPlan,
    f: usize,
) -> Result<f64> {
    let train = plan.train_indices(f);
    let test = plan.test_indices(f);
    let y_train: Vec<f64> = train.iter().map(|&i| matrix.y[i]).collect();
    let y_test: Vec<f64> = test.iter().map(|&i| matrix.y[i]).collect();
    let model = fit_model(
        kind,
        &matrix.x.select_rows(&train),
        &y_train,
        config,
        fold_seed(plan.seed, f),
    )?;
    let predicted = model.predict(&matrix.x.select_rows(test), config.clamp)?;
    rmse(&y_test, &predicted)
}
