//! The lineage ledger: an append-only, hash-chained record of every
//! operation applied to a dataset, persisted as one canonical-JSON entry per
//! line.
//!
//! Each entry's `entry_hash` is the SHA-256 of its canonical serialization
//! with the `entry_hash` field removed; `prev_entry_hash` links it to the
//! preceding entry (32 zero bytes for the first). Any single-byte edit to a
//! persisted entry breaks verification at or before that entry. Replaying a
//! verified ledger re-applies the recorded remediation steps and must land
//! exactly on the recorded digests.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use fs2::FileExt;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::canonical_json;
use crate::dataset::{Dataset, Digest};
use crate::remediate::{apply_step, Actor, ChangeSummary, RemediationStep, StepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Ingest,
    Profile,
    Assess,
    RemediationStep,
    ReportRender,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Ingest => "ingest",
            Operation::Profile => "profile",
            Operation::Assess => "assess",
            Operation::RemediationStep => "remediation_step",
            Operation::ReportRender => "report_render",
        }
    }
}

/// Operation-specific payload recorded on a ledger entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OperationDetail {
    Ingest {
        source_path: String,
        row_count: u64,
        column_count: u64,
    },
    Profile {
        row_count: u64,
        column_count: u64,
    },
    Assess {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        overall_score: Option<f64>,
        dimension_scores: BTreeMap<String, Option<f64>>,
    },
    RemediationStep {
        step: RemediationStep,
        summary: ChangeSummary,
    },
    ReportRender {
        format: String,
        output_path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageEntry {
    /// Dense, 1-based position in the ledger.
    pub entry_id: u64,
    pub timestamp: DateTime<Utc>,
    pub actor: Actor,
    pub operation: Operation,
    pub operation_detail: OperationDetail,
    pub input_digest: Digest,
    /// Equals `input_digest` for non-mutating operations.
    pub output_digest: Digest,
    pub prev_entry_hash: Digest,
    pub entry_hash: Digest,
}

impl LineageEntry {
    /// Recompute this entry's hash from every other field.
    pub fn computed_hash(&self) -> Digest {
        let mut value = serde_json::to_value(self).expect("entry serializes");
        value
            .as_object_mut()
            .expect("entry is an object")
            .remove("entry_hash");
        let bytes = canonical_json::canonical_bytes(&value);
        Digest(Sha256::digest(bytes).into())
    }
}

/// Fields the caller supplies for a new entry; ids, chaining, and hashes are
/// the ledger's responsibility.
#[derive(Debug, Clone)]
pub struct EntryDraft {
    pub timestamp: DateTime<Utc>,
    pub actor: Actor,
    pub operation: Operation,
    pub operation_detail: OperationDetail,
    pub input_digest: Digest,
    pub output_digest: Digest,
}

#[derive(Debug, thiserror::Error)]
pub enum LineageError {
    #[error("ledger i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("ledger parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("ledger hash chain broken at entry {entry_id}")]
    ChainBroken { entry_id: u64 },
    #[error("baseline digest {found} does not match the ledger's first entry input {expected}")]
    BaselineMismatch { expected: Digest, found: Digest },
    #[error("replay diverged at entry {entry_id}: expected digest {expected}, got {found}")]
    ReplayDivergence {
        entry_id: u64,
        expected: Digest,
        found: Digest,
    },
    #[error("ledger has no entry {entry_id}")]
    UnknownEntry { entry_id: u64 },
    #[error("replaying entry {entry_id} failed: {source}")]
    ReplayStep {
        entry_id: u64,
        source: StepError,
    },
}

/// Handle to a ledger file. The file is created on first append; reads of a
/// nonexistent ledger see an empty (vacuously valid) history.
#[derive(Debug, Clone)]
pub struct LineageLedger {
    path: PathBuf,
}

impl LineageLedger {
    pub fn open(path: impl Into<PathBuf>) -> Self {
        LineageLedger { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Parse all entries without verifying the chain.
    pub fn read_entries(&self) -> Result<Vec<LineageEntry>, LineageError> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let entry: LineageEntry =
                serde_json::from_str(&line).map_err(|e| LineageError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            entries.push(entry);
        }
        Ok(entries)
    }

    /// Verify hashes, chain links, id density, and timestamp order over a
    /// parsed entry list. Returns the first broken entry's id on failure.
    pub fn verify_entries(entries: &[LineageEntry]) -> Result<(), LineageError> {
        let mut prev_hash = Digest::ZERO;
        let mut prev_ts: Option<DateTime<Utc>> = None;
        for (i, entry) in entries.iter().enumerate() {
            let broken = LineageError::ChainBroken {
                entry_id: entry.entry_id,
            };
            if entry.entry_id != (i as u64) + 1 {
                return Err(broken);
            }
            if entry.prev_entry_hash != prev_hash {
                return Err(broken);
            }
            if entry.computed_hash() != entry.entry_hash {
                return Err(broken);
            }
            if prev_ts.is_some_and(|p| entry.timestamp < p) {
                return Err(broken);
            }
            prev_hash = entry.entry_hash;
            prev_ts = Some(entry.timestamp);
        }
        Ok(())
    }

    /// Read and verify the whole ledger, returning its entries.
    pub fn verify(&self) -> Result<Vec<LineageEntry>, LineageError> {
        let entries = self.read_entries()?;
        Self::verify_entries(&entries)?;
        Ok(entries)
    }

    /// Append one entry. The ledger is re-verified up to its tail first —
    /// appending to a corrupt ledger is refused — and the write is flushed
    /// before returning. An exclusive advisory lock covers the whole
    /// read–verify–write sequence.
    pub fn append(&self, draft: EntryDraft) -> Result<LineageEntry, LineageError> {
        if let Some(parent) = self.path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&self.path)?;
        file.lock_exclusive()?;
        let result = self.append_locked(&mut file, draft);
        let _ = fs2::FileExt::unlock(&file);
        result
    }

    fn append_locked(
        &self,
        file: &mut File,
        draft: EntryDraft,
    ) -> Result<LineageEntry, LineageError> {
        let entries = self.verify()?;
        let (entry_id, prev_entry_hash, min_ts) = match entries.last() {
            Some(last) => (last.entry_id + 1, last.entry_hash, Some(last.timestamp)),
            None => (1, Digest::ZERO, None),
        };
        // Keep file order chronologically monotone even if the clock steps back.
        let timestamp = match min_ts {
            Some(floor) if draft.timestamp < floor => floor,
            _ => draft.timestamp,
        };
        let mut entry = LineageEntry {
            entry_id,
            timestamp,
            actor: draft.actor,
            operation: draft.operation,
            operation_detail: draft.operation_detail,
            input_digest: draft.input_digest,
            output_digest: draft.output_digest,
            prev_entry_hash,
            entry_hash: Digest::ZERO,
        };
        entry.entry_hash = entry.computed_hash();

        let value = serde_json::to_value(&entry).expect("entry serializes");
        let mut line = canonical_json::canonical_string(&value);
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.flush()?;
        file.sync_data()?;
        Ok(entry)
    }

    /// Rebuild the dataset by re-applying recorded remediation steps to
    /// `baseline`, stopping after entry `upto` when given. Every applied
    /// entry's recorded digests are checked against the live result.
    pub fn replay(
        &self,
        baseline: &Dataset,
        upto: Option<u64>,
    ) -> Result<Dataset, LineageError> {
        let entries = self.verify()?;
        if let Some(bound) = upto {
            let last = entries.last().map_or(0, |e| e.entry_id);
            if bound == 0 || bound > last {
                return Err(LineageError::UnknownEntry { entry_id: bound });
            }
        }
        if let Some(first) = entries.first() {
            if first.input_digest != baseline.digest() {
                return Err(LineageError::BaselineMismatch {
                    expected: first.input_digest,
                    found: baseline.digest(),
                });
            }
        }
        let mut current = baseline.clone();
        for entry in &entries {
            if upto.is_some_and(|bound| entry.entry_id > bound) {
                break;
            }
            let OperationDetail::RemediationStep { step, summary } = &entry.operation_detail
            else {
                continue;
            };
            if current.digest() != summary.input_digest {
                return Err(LineageError::ReplayDivergence {
                    entry_id: entry.entry_id,
                    expected: summary.input_digest,
                    found: current.digest(),
                });
            }
            let (next, _) = apply_step(&current, step).map_err(|source| {
                LineageError::ReplayStep {
                    entry_id: entry.entry_id,
                    source,
                }
            })?;
            if next.digest() != summary.output_digest {
                return Err(LineageError::ReplayDivergence {
                    entry_id: entry.entry_id,
                    expected: summary.output_digest,
                    found: next.digest(),
                });
            }
            current = next;
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::remediate::Persona;

    fn draft(op: Operation, ts_secs: i64) -> EntryDraft {
        EntryDraft {
            timestamp: DateTime::from_timestamp(ts_secs, 0).unwrap(),
            actor: Actor::new("dana", Persona::DataSteward),
            operation: op,
            operation_detail: OperationDetail::Profile {
                row_count: 10,
                column_count: 2,
            },
            input_digest: Digest([7u8; 32]),
            output_digest: Digest([7u8; 32]),
        }
    }

    fn temp_ledger() -> (tempfile::TempDir, LineageLedger) {
        let dir = tempfile::tempdir().unwrap();
        let ledger = LineageLedger::open(dir.path().join("ledger.jsonl"));
        (dir, ledger)
    }

    #[test]
    fn genesis_and_chaining_rules() {
        let (_dir, ledger) = temp_ledger();
        assert!(ledger.verify().unwrap().is_empty()); // vacuous

        let first = ledger.append(draft(Operation::Ingest, 100)).unwrap();
        assert_eq!(first.entry_id, 1);
        assert_eq!(first.prev_entry_hash, Digest::ZERO);

        let second = ledger.append(draft(Operation::Profile, 200)).unwrap();
        assert_eq!(second.entry_id, 2);
        assert_eq!(second.prev_entry_hash, first.entry_hash);

        let entries = ledger.verify().unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[1].entry_hash, second.entry_hash);
    }

    #[test]
    fn timestamps_never_run_backwards() {
        let (_dir, ledger) = temp_ledger();
        ledger.append(draft(Operation::Ingest, 500)).unwrap();
        let clamped = ledger.append(draft(Operation::Profile, 400)).unwrap();
        assert_eq!(
            clamped.timestamp,
            DateTime::from_timestamp(500, 0).unwrap()
        );
        ledger.verify().unwrap();
    }

    #[test]
    fn tampering_breaks_verification_and_blocks_appends() {
        let (_dir, ledger) = temp_ledger();
        ledger.append(draft(Operation::Ingest, 100)).unwrap();
        ledger.append(draft(Operation::Profile, 200)).unwrap();
        ledger.append(draft(Operation::Assess, 300)).unwrap();

        let original = std::fs::read(ledger.path()).unwrap();
        let lines: Vec<&[u8]> = original.split(|b| *b == b'\n').collect();
        // Flip one byte inside the second entry's JSON (a digit of row_count).
        let mut tampered = Vec::new();
        for (i, line) in lines.iter().enumerate() {
            let mut line = line.to_vec();
            if i == 1 {
                let pos = line
                    .windows(11)
                    .position(|w| w == b"\"row_count\"")
                    .unwrap()
                    + 12;
                line[pos] = if line[pos] == b'1' { b'2' } else { b'1' };
            }
            tampered.extend_from_slice(&line);
            if i + 1 < lines.len() {
                tampered.push(b'\n');
            }
        }
        std::fs::write(ledger.path(), &tampered).unwrap();

        let err = ledger.verify().unwrap_err();
        assert!(
            matches!(err, LineageError::ChainBroken { entry_id: 2 }),
            "{err:?}"
        );
        let err = ledger.append(draft(Operation::Assess, 400)).unwrap_err();
        assert!(matches!(err, LineageError::ChainBroken { .. }), "{err:?}");
    }

    #[test]
    fn parse_errors_name_the_line() {
        let (_dir, ledger) = temp_ledger();
        ledger.append(draft(Operation::Ingest, 100)).unwrap();
        let mut bytes = std::fs::read(ledger.path()).unwrap();
        bytes.extend_from_slice(b"this is not json\n");
        std::fs::write(ledger.path(), &bytes).unwrap();
        let err = ledger.read_entries().unwrap_err();
        assert!(
            matches!(err, LineageError::Parse { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn entry_hash_is_over_canonical_bytes_of_all_other_fields() {
        let (_dir, ledger) = temp_ledger();
        let entry = ledger.append(draft(Operation::Ingest, 100)).unwrap();
        // Independent recomputation: parse the persisted line, strip
        // entry_hash, canonicalize, hash.
        let raw = std::fs::read_to_string(ledger.path()).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(raw.lines().next().unwrap()).unwrap();
        value.as_object_mut().unwrap().remove("entry_hash");
        let digest = Sha256::digest(canonical_json::canonical_bytes(&value));
        assert_eq!(entry.entry_hash, Digest(digest.into()));
    }
}
