//! Summaries of a grid run: the best-K table, RMSE-vs-K series, and output files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentResult, ResultMetadata};
use crate::error::{Error, Result};
use crate::features::FeatureMethod;
use crate::regress::ModelKind;

pub const LEAKAGE_NOTE: &str =
    "vocabularies are selected on the full corpus before the fold split; \
     model fitting and feature normalization use training rows only";

/// Best K for one (method, model) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestRow {
    pub method: FeatureMethod,
    pub model: ModelKind,
    pub best_k: usize,
    pub best_rmse: f64,
    /// Whether this model has the lowest RMSE among the models of its method.
    pub method_minimum: bool,
}

/// RMSE against K for each model of one feature method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub method: FeatureMethod,
    pub ks: Vec<usize>,
    pub models: Vec<ModelKind>,
    /// `rmse[i][j]` is the mean RMSE at `ks[i]` for `models[j]`.
    pub rmse: Vec<Vec<Option<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub version: String,
    pub corpus_hash: String,
    pub fold_seed: u64,
    pub stopwords: crate::text::StopwordPolicy,
    pub stopwords_hash: String,
    pub lexicon_hash: String,
    pub leakage_note: String,
    /// Free-form description of the run that produced the results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run_config: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub table: Vec<BestRow>,
    pub series: Vec<Series>,
    pub metadata: ReportMetadata,
}

pub fn report(results: &[ExperimentResult]) -> Result<Report> {
    let first = results.first().ok_or(Error::EmptyInput)?;

    let mut best: BTreeMap<(FeatureMethod, ModelKind), (usize, f64)> = BTreeMap::new();
    for r in results {
        best.entry((r.method, r.model))
            .and_modify(|b| {
                if r.mean_rmse < b.1 || (r.mean_rmse == b.1 && r.k < b.0) {
                    *b = (r.k, r.mean_rmse);
                }
            })
            .or_insert((r.k, r.mean_rmse));
    }
    let mut method_min: BTreeMap<FeatureMethod, (ModelKind, f64)> = BTreeMap::new();
    for (&(method, model), &(_, e)) in &best {
        let slot = method_min.entry(method).or_insert((model, e));
        if e < slot.1 {
            *slot = (model, e);
        }
    }
    let table = best
        .iter()
        .map(|(&(method, model), &(best_k, best_rmse))| BestRow {
            method,
            model,
            best_k,
            best_rmse,
            method_minimum: method_min[&method].0 == model,
        })
        .collect();

    let mut by_method: BTreeMap<FeatureMethod, Vec<&ExperimentResult>> = BTreeMap::new();
    for r in results {
        by_method.entry(r.method).or_default().push(r);
    }
    let series = by_method
        .into_iter()
        .map(|(method, rs)| {
            let mut ks: Vec<usize> = rs.iter().map(|r| r.k).collect();
            ks.sort_unstable();
            ks.dedup();
            let mut models: Vec<ModelKind> = rs.iter().map(|r| r.model).collect();
            models.sort();
            models.dedup();
            let mut rmse = vec![vec![None; models.len()]; ks.len()];
            for r in rs {
                let i = ks.binary_search(&r.k).expect("k present");
                let j = models.binary_search(&r.model).expect("model present");
                rmse[i][j] = Some(r.mean_rmse);
            }
            Series {
                method,
                ks,
                models,
                rmse,
            }
        })
        .collect();

    Ok(Report {
        table,
        series,
        metadata: metadata_from(&first.metadata),
    })
}

fn metadata_from(m: &ResultMetadata) -> ReportMetadata {
    ReportMetadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        corpus_hash: m.corpus_hash.clone(),
        fold_seed: m.fold_seed,
        stopwords: m.stopwords,
        stopwords_hash: m.stopwords_hash.clone(),
        lexicon_hash: m.lexicon_hash.clone(),
        leakage_note: LEAKAGE_NOTE.to_string(),
        run_config: None,
    }
}

/// Write `results.csv`, `summary.json`, one `series_<method>.csv` per method,
/// and `timings.csv` into `dir`. Everything except `timings.csv` is a pure
/// function of the results.
pub fn write_outputs(dir: &Path, results: &[ExperimentResult], report: &Report) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    w.write_record(["method", "model", "k", "fold", "rmse"])?;
    for r in results {
        for (fold, e) in r.fold_rmse.iter().enumerate() {
            w.write_record([
                r.method.name(),
                r.model.name(),
                &r.k.to_string(),
                &fold.to_string(),
                &e.to_string(),
            ])?;
        }
    }
    w.flush()?;

    for s in &report.series {
        let mut w = csv::Writer::from_path(dir.join(format!("series_{}.csv", s.method.name())))?;
        let mut header = vec!["k".to_string()];
        header.extend(s.models.iter().map(|m| m.name().to_string()));
        w.write_record(&header)?;
        for (k, row) in s.ks.iter().zip(&s.rmse) {
            let mut record = vec![k.to_string()];
            record.extend(
                row.iter()
                    .map(|v| v.map(|e| e.to_string()).unwrap_or_default()),
            );
            w.write_record(&record)?;
        }
        w.flush()?;
    }

    let mut w = csv::Writer::from_path(dir.join("timings.csv"))?;
    w.write_record(["method", "model", "k", "seconds"])?;
    for r in results {
        w.write_record([
            r.method.name(),
            r.model.name(),
            &r.k.to_string(),
            &format!("{:.6}", r.wall_time),
        ])?;
    }
    w.flush()?;

    let mut out = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::StopwordPolicy;

    fn result(method: FeatureMethod, model: ModelKind, k: usize, e: f64) -> ExperimentResult {
        ExperimentResult {
            method,
            model,
            k,
            vocabulary_size: k,
            fold_rmse: vec![e; 10],
            mean_rmse: e,
            wall_time: 0.5,
            metadata: ResultMetadata {
                corpus_hash: "c".into(),
                fold_seed: 1,
                stopwords: StopwordPolicy::Enabled,
                stopwords_hash: "s".into(),
                lexicon_hash: "l".into(),
            },
        }
    }

    fn grid() -> Vec<ExperimentResult> {
        let mut out = Vec::new();
        for (mi, method) in FeatureMethod::ALL.into_iter().enumerate() {
            for (ki, model) in ModelKind::ALL.into_iter().enumerate() {
                for (i, k) in [30, 50, 100, 200, 300, 500, 1000].into_iter().enumerate() {
                    let e =
                        0.6 + 0.01 * ki as f64 + 0.001 * mi as f64 + 0.002 * (i as f64 - 2.0).abs();
                    out.push(result(method, model, k, e));
                }
            }
        }
        out
    }

    #[test]
    fn table_and_series_shape() {
        let results = grid();
        assert_eq!(results.len(), 84);
        let rep = report(&results).unwrap();
        assert_eq!(rep.table.len(), 12);
        assert!(rep.table.iter().all(|r| r.best_k == 100));
        assert_eq!(rep.series.len(), 3);
        for s in &rep.series {
            assert_eq!(s.ks.len(), 7);
            assert_eq!(s.models.len(), 4);
            assert!(s.rmse.iter().flatten().all(Option::is_some));
        }
        for method in FeatureMethod::ALL {
            let rows: Vec<&BestRow> = rep.table.iter().filter(|r| r.method == method).collect();
            let flagged: Vec<&&BestRow> = rows.iter().filter(|r| r.method_minimum).collect();
            assert_eq!(flagged.len(), 1);
            let argmin = rows
                .iter()
                .min_by(|a, b| a.best_rmse.total_cmp(&b.best_rmse))
                .unwrap();
            assert_eq!(flagged[0].model, argmin.model);
        }
    }

    #[test]
    fn single_result() {
        let rep = report(&[result(FeatureMethod::Baseline, ModelKind::Tree, 30, 0.7)]).unwrap();
        assert_eq!(rep.table.len(), 1);
        assert!(rep.table[0].method_minimum);
        assert!(matches!(report(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn files_written() {
        let dir = tempfile::tempdir().unwrap();
        let results = grid();
        let rep = report(&results).unwrap();
        write_outputs(dir.path(), &results, &rep).unwrap();
        let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 84 * 10);
        assert!(csv.starts_with("method,model,k,fold,rmse\nbaseline,linear,30,0,"));
        let series = fs::read_to_string(dir.path().join("series_words-pos.csv")).unwrap();
        assert_eq!(series.lines().next().unwrap(), "k,linear,svr,svr-n,tree");
        assert_eq!(series.lines().count(), 8);
        let back: Report =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(back, rep);
        assert!(dir.path().join("timings.csv").exists());
    }
}
