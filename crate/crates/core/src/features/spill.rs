//! Partial term counts written to disk while counting oversized businesses.
//!
//! Each chunk of a business's reviews is counted into its own map and written
//! to `<business_id>.part<i>.tsv` (`term<TAB>count`, sorted by term). Once
//! every chunk is written, the parts are read back, summed, and deleted.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Environment variable that overrides the base directory for spill files.
pub const SPILL_DIR_ENV: &str = "STARFORGE_TMP";

/// `$STARFORGE_TMP` if set, else the system temporary directory.
pub fn spill_base_dir() -> PathBuf {
    std::env::var_os(SPILL_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir)
}

/// Business ids are used in file names as-is when they only contain
/// `[A-Za-z0-9_-]`; anything else is hex-encoded.
fn file_stem(business_id: &str) -> String {
    let safe = !business_id.is_empty()
        && business_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if safe {
        business_id.to_string()
    } else {
        format!("x{}", hex::encode(business_id))
    }
}

pub(crate) fn part_path(dir: &Path, business_id: &str, part: usize) -> PathBuf {
    dir.join(format!("{}.part{part}.tsv", file_stem(business_id)))
}

pub(crate) fn write_part(path: &Path, counts: &HashMap<String, u64>) -> Result<()> {
    let mut terms: Vec<(&String, &u64)> = counts.iter().collect();
    terms.sort_unstable_by(|a, b| a.0.cmp(b.0));
    let mut w = BufWriter::new(File::create(path)?);
    for (term, count) in terms {
        writeln!(w, "{term}\t{count}")?;
    }
    w.flush()?;
    Ok(())
}

/// Sum the part files into one map, deleting each part after it is read.
pub(crate) fn merge_parts(paths: &[PathBuf]) -> Result<HashMap<String, u64>> {
    let mut merged: HashMap<String, u64> = HashMap::new();
    for path in paths {
        let reader = BufReader::new(File::open(path)?);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let parsed = line
                .split_once('\t')
                .and_then(|(t, c)| c.parse::<u64>().ok().map(|c| (t, c)));
            let Some((term, count)) = parsed else {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}:{}: malformed partial count", path.display(), idx + 1),
                )
                .into());
            };
            *merged.entry(term.to_string()).or_insert(0) += count;
        }
        fs::remove_file(path)?;
    }
    Ok(merged)
}
