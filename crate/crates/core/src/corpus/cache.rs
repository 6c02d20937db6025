//! Corpus cache file.
//!
//! JSON lines. The first line is a header object
//! `{"magic":"STARFORGE-CORPUS","version":1,"seed":..,"filter":..,"provenance":{..}}`;
//! each following line is `{"business":{..},"reviews":[..]}`, in business-id order.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BusinessRecord, Corpus, Provenance};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &str = "STARFORGE-CORPUS";
pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    seed: u64,
    filter: Option<String>,
    provenance: Provenance,
}

#[derive(Serialize)]
struct EntryRef<'a> {
    business: &'a BusinessRecord,
    reviews: &'a [String],
}

#[derive(Deserialize)]
struct Entry {
    business: BusinessRecord,
    reviews: Vec<String>,
}

pub fn write_cache<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    let header = Header {
        magic: CACHE_MAGIC.into(),
        version: CACHE_VERSION,
        seed: corpus.provenance.selection.seed,
        filter: corpus.provenance.selection.category.clone(),
        provenance: corpus.provenance.clone(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    write_entries(corpus, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_entries<W: Write>(corpus: &Corpus, out: &mut W) -> Result<()> {
    for (id, business) in &corpus.businesses {
        let entry = EntryRef {
            business,
            reviews: corpus
                .reviews
                .get(id)
                .map(Vec::as_slice)
                .unwrap_or_default(),
        };
        serde_json::to_writer(&mut *out, &entry)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_cache<R: BufRead>(input: R) -> Result<Corpus> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::InvalidCache("empty file".into()))??;
    let header: Header = serde_json::from_str(&first)
        .map_err(|e| Error::InvalidCache(format!("bad header: {e}")))?;
    if header.magic != CACHE_MAGIC {
        return Err(Error::InvalidCache(format!(
            "unexpected magic {:?}",
            header.magic
        )));
    }
    if header.version != CACHE_VERSION {
        return Err(Error::InvalidCache(format!(
            "unsupported version {} (expected {CACHE_VERSION})",
            header.version
        )));
    }
    let mut businesses = BTreeMap::new();
    let mut reviews = BTreeMap::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: Entry = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidCache(format!("line {}: {e}", idx + 2)))?;
        let id = entry.business.business_id.clone();
        if businesses.insert(id.clone(), entry.business).is_some() {
            return Err(Error::InvalidCache(format!("duplicate business {id:?}")));
        }
        reviews.insert(id, entry.reviews);
    }
    Corpus::from_parts(businesses, reviews, header.provenance)
}

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

pub(super) fn content_hash(corpus: &Corpus) -> String {
    let mut w = HashWriter(Sha256::new());
    write_entries(corpus, &mut w).expect("hashing writer cannot fail");
    hex::encode(w.0.finalize())
}
