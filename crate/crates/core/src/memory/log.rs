//! Append-only JSON-lines log of strategy records. Each line names its
//! schema version so old logs stay readable.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MemoryPolicy, MemoryStore, StrategyRecord};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogLine {
    pub schema_version: u32,
    pub record: StrategyRecord,
}

fn encode(record: &StrategyRecord) -> Result<String> {
    serde_json::to_string(&LogLine {
        schema_version: SCHEMA_VERSION,
        record: record.clone(),
    })
    .map_err(|e| Error::Parse(e.to_string()))
}

pub fn append_record(path: &Path, record: &StrategyRecord) -> Result<()> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    writeln!(f, "{}", encode(record)?).map_err(|e| Error::io(path, e))
}

pub fn write_log<W: Write>(mut w: W, records: &[StrategyRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", encode(r)?).map_err(|e| Error::io("<log>", e))?;
    }
    Ok(())
}

pub fn read_log(path: &Path) -> Result<Vec<StrategyRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LogLine = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if parsed.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "{}:{}: unsupported schema version {}",
                path.display(),
                i + 1,
                parsed.schema_version
            )));
        }
        out.push(parsed.record);
    }
    Ok(out)
}

/// Rebuilds a store by offering every logged record in order.
pub fn replay(path: &Path, policy: MemoryPolicy) -> Result<MemoryStore> {
    let mut store = MemoryStore::new(policy);
    for r in read_log(path)? {
        store.record_episode(r)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::super::tests::rec;
    use super::super::NegotiationResult::*;
    use super::*;

    #[test]
    fn replay_reconstructs_the_store() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("memory.jsonl");
        let records = vec![
            rec("a", 0, &["x"], AgreementSuccess, Some(20.0)),
            rec("b", 1, &["y"], UnresolvedNegotiation, None),
        ];
        let mut live = MemoryStore::new(MemoryPolicy::Unbiased);
        for r in &records {
            live.record_episode(r.clone()).unwrap();
            append_record(&path, r).unwrap();
        }
        assert_eq!(replay(&path, MemoryPolicy::Unbiased).unwrap(), live);
        assert_eq!(replay(&path, MemoryPolicy::Vanilla).unwrap().len(), 1);
    }

    #[test]
    fn foreign_schema_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let line = encode(&rec("a", 0, &[], AgreementSuccess, None))
            .unwrap()
            .replace("\"schema_version\":1", "\"schema_version\":9");
        std::fs::write(&path, line).unwrap();
        assert!(matches!(read_log(&path), Err(Error::Parse(_))));
    }
}
