//! Feature matrix export: a CSV of frequencies and a JSON sidecar describing it.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, FeatureMethod, Vocabulary};
use crate::error::Result;
use crate::text::StopwordPolicy;

pub const SIDECAR_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSidecar {
    pub format_version: u32,
    pub method: FeatureMethod,
    pub k: usize,
    pub rows: usize,
    pub vocabulary: Vocabulary,
    pub stopwords: StopwordPolicy,
    pub stopwords_hash: String,
    pub lexicon_hash: String,
    pub corpus_hash: String,
}

impl FeatureMatrix {
    /// Header `business_id,<term_1>,...,<term_K>,star`, one row per business.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["business_id".to_string()];
        header.extend(self.vocabulary.term_names().map(str::to_string));
        header.push("star".into());
        w.write_record(&header)?;
        for (i, id) in self.row_ids.iter().enumerate() {
            let mut record = Vec::with_capacity(self.k() + 2);
            record.push(id.clone());
            record.extend(self.x.row(i).iter().map(|v| v.to_string()));
            record.push(self.y[i].to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> FeatureSidecar {
        FeatureSidecar {
            format_version: SIDECAR_VERSION,
            method: self.vocabulary.method,
            k: self.vocabulary.k,
            rows: self.n(),
            vocabulary: self.vocabulary.clone(),
            stopwords: self.metadata.stopwords,
            stopwords_hash: self.metadata.stopwords_hash.clone(),
            lexicon_hash: self.metadata.lexicon_hash.clone(),
            corpus_hash: self.metadata.corpus_hash.clone(),
        }
    }

    /// Write `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(BufWriter::new(File::create(
            dir.join(format!("{stem}.csv")),
        )?))?;
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}.json")))?);
        serde_json::to_writer_pretty(&mut w, &self.sidecar())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}
