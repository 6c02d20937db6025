use log::info;
use serde::{Deserialize, Serialize};

use super::{cross_validate_with, make_folds, ExperimentResult};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{
    build_vocabulary, count_terms, CountOptions, FeatureMatrix, FeatureMetadata, FeatureMethod,
};
use crate::par;
use crate::pos::Lexicon;
use crate::regress::{ModelConfig, ModelKind};

pub const DEFAULT_KS: [usize; 7] = [30, 50, 100, 200, 300, 500, 1000];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub methods: Vec<FeatureMethod>,
    pub models: Vec<ModelKind>,
    pub ks: Vec<usize>,
    pub seed: u64,
    pub models_config: ModelConfig,
    pub counting: CountOptions,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            methods: FeatureMethod::ALL.to_vec(),
            models: ModelKind::ALL.to_vec(),
            ks: DEFAULT_KS.to_vec(),
            seed: 0,
            models_config: ModelConfig::default(),
            counting: CountOptions::default(),
        }
    }
}

/// Cross-validate every (method, model, k) combination over one shared fold plan.
///
/// Terms are counted once per method and the vocabulary is selected once at the
/// largest `k`; smaller vocabularies are its prefixes. Results are sorted by
/// (method, model, k).
pub fn run_grid(
    corpus: &Corpus,
    spec: &GridSpec,
    lexicon: &Lexicon,
) -> Result<Vec<ExperimentResult>> {
    if spec.methods.is_empty() || spec.models.is_empty() || spec.ks.is_empty() {
        return Err(Error::DegenerateInput(
            "grid needs at least one method, model and K".into(),
        ));
    }
    if spec.ks.contains(&0) {
        return Err(Error::DegenerateInput(
            "vocabulary size must be at least 1".into(),
        ));
    }
    let mut methods = spec.methods.clone();
    methods.sort();
    methods.dedup();
    let mut models = spec.models.clone();
    models.sort();
    models.dedup();
    let mut ks = spec.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let max_k = *ks.last().expect("non-empty");

    let plan = make_folds(corpus.len(), spec.seed)?;
    let metadata = FeatureMetadata::new(corpus, lexicon, spec.counting.stopwords);
    let exec = spec.counting.execution;

    let mut results = Vec::with_capacity(methods.len() * models.len() * ks.len());
    for method in methods {
        let counts = count_terms(corpus, method, lexicon, &spec.counting)?;
        let full = build_vocabulary(&counts.global, method, max_k)?;
        if full.len() < max_k {
            info!(
                "{method}: only {} distinct terms for K up to {max_k}",
                full.len()
            );
        }
        let per_k = par::try_map(exec, &ks, |&k| {
            let matrix =
                FeatureMatrix::from_counts(corpus, &counts, full.prefix(k), metadata.clone());
            let row = par::try_map(exec, &models, |&kind| {
                cross_validate_with(&matrix, kind, &spec.models_config, &plan, exec)
            })?;
            Ok::<_, Error>(row)
        })?;
        results.extend(per_k.into_iter().flatten());
    }
    results.sort_by_key(|r| (r.method, r.model, r.k));
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BusinessRecord, ReviewRecord, Selection};
    use crate::eval::cross_validate;
    use crate::features::build_matrix;
    use crate::par::Execution;

    fn corpus() -> Corpus {
        let words = [
            "great", "tasty", "bad", "slow", "pizza", "fresh", "awful", "friendly", "cold",
            "service",
        ];
        let mut bs = Vec::new();
        let mut rs = Vec::new();
        for b in 0..24 {
            let id = format!("b{b:02}");
            let mut stars = 3.0;
            for r in 0..3 {
                let text: Vec<&str> = (0..6)
                    .map(|t| words[(b * 7 + r * 3 + t * (b % 4 + 1)) % words.len()])
                    .collect();
                stars += text
                    .iter()
                    .filter(|w| ["great", "tasty", "fresh", "friendly"].contains(w))
                    .count() as f64
                    * 0.05;
                rs.push(ReviewRecord {
                    review_id: format!("{id}-{r}"),
                    business_id: id.clone(),
                    stars: 3,
                    text: format!("{}. The food was ok!", text.join(" ")),
                });
            }
            bs.push(BusinessRecord {
                business_id: id,
                stars: (stars * 2.0).round().min(10.0) / 2.0,
                categories: vec!["Restaurants".into()],
                review_count: 3,
            });
        }
        Corpus::from_records(bs, rs, &Selection::all()).unwrap().0
    }

    #[test]
    fn grid_shape_order_and_singleton() {
        let c = corpus();
        let spec = GridSpec {
            ks: vec![5, 2],
            seed: 11,
            ..GridSpec::default()
        };
        let results = run_grid(&c, &spec, Lexicon::embedded()).unwrap();
        assert_eq!(results.len(), 3 * 4 * 2);
        let keys: Vec<_> = results.iter().map(|r| (r.method, r.model, r.k)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);

        let direct_matrix = build_matrix(
            &c,
            FeatureMethod::Baseline,
            2,
            Lexicon::embedded(),
            &CountOptions::default(),
        )
        .unwrap();
        let plan = make_folds(c.len(), 11).unwrap();
        let direct = cross_validate(
            &direct_matrix,
            ModelKind::Linear,
            &ModelConfig::default(),
            &plan,
        )
        .unwrap();
        let single = GridSpec {
            methods: vec![FeatureMethod::Baseline],
            models: vec![ModelKind::Linear],
            ks: vec![2],
            seed: 11,
            ..GridSpec::default()
        };
        let from_grid = run_grid(&c, &single, Lexicon::embedded()).unwrap();
        assert_eq!(from_grid.len(), 1);
        assert!(from_grid[0].same_outcome(&direct));
        assert!(results.iter().any(|r| r.same_outcome(&direct)));
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let c = corpus();
        let mut spec = GridSpec {
            ks: vec![3, 6],
            seed: 5,
            ..GridSpec::default()
        };
        let a = run_grid(&c, &spec, Lexicon::embedded()).unwrap();
        spec.counting.execution = Execution::Sequential;
        let b = run_grid(&c, &spec, Lexicon::embedded()).unwrap();
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)));
    }

    #[test]
    fn empty_sets_rejected() {
        let spec = GridSpec {
            models: vec![],
            ..GridSpec::default()
        };
        assert!(run_grid(&corpus(), &spec, Lexicon::embedded()).is_err());
    }
}
