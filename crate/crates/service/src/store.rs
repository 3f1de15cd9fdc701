//! Append-only submission log. Every accepted submission is written and
//! synced before it is acknowledged; the in-memory index is rebuilt from the
//! log on open.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ghosteval::annotation::{write_jsonl, AnnotationRecord, TaskKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub assignment_id: String,
    pub records: usize,
    pub timestamp: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub struct Store {
    path: PathBuf,
    file: File,
    records: Vec<AnnotationRecord>,
    acks: HashMap<String, Ack>,
    last_timestamp: u64,
}

impl Store {
    /// Opens or creates the log. `expected` gives the record count of a
    /// complete submission; a torn final submission (crash mid-append, never
    /// acknowledged) is cut off. Anything else malformed is an error.
    pub fn open(path: &Path, expected: impl Fn(&str) -> Option<usize>) -> Result<Self, StoreError> {
        let io_err = |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io_err(e)),
        };

        // (byte offset where the line starts, parsed record)
        let mut parsed: Vec<(usize, AnnotationRecord)> = Vec::new();
        let mut offset = 0;
        let mut torn_at = None;
        for (k, raw) in bytes.split_inclusive(|b| *b == b'\n').enumerate() {
            let last = offset + raw.len() == bytes.len();
            let problem = match serde_json::from_slice::<AnnotationRecord>(raw) {
                Ok(r) if raw.ends_with(b"\n") && r.assignment_id.is_some() => {
                    parsed.push((offset, r));
                    None
                }
                Ok(r) if r.assignment_id.is_none() => Some("record without assignment_id".to_string()),
                Ok(_) => Some("missing final newline".to_string()),
                Err(e) => Some(e.to_string()),
            };
            match problem {
                Some(_) if last => torn_at = Some(offset),
                Some(message) => {
                    return Err(StoreError::Corrupt {
                        path: path.to_path_buf(),
                        line: k + 1,
                        message,
                    })
                }
                None => {}
            }
            offset += raw.len();
        }

        // group consecutive records by assignment
        let mut groups: Vec<(usize, usize, usize)> = Vec::new(); // (start index, len, byte offset)
        for (i, (off, r)) in parsed.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if parsed[g.0].1.assignment_id == r.assignment_id => g.1 += 1,
                _ => groups.push((i, 1, *off)),
            }
        }
        let mut keep = parsed.len();
        for (n, &(start, len, off)) in groups.iter().enumerate() {
            let id = parsed[start].1.assignment_id.as_deref().unwrap_or_default();
            if expected(id) == Some(len) {
                continue;
            }
            if n + 1 == groups.len() {
                torn_at = Some(off);
                keep = start;
            } else {
                return Err(StoreError::Corrupt {
                    path: path.to_path_buf(),
                    line: start + 1,
                    message: format!("assignment {id} has {len} records, expected {:?}", expected(id)),
                });
            }
        }
        parsed.truncate(keep);

        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
        if let Some(at) = torn_at {
            log::warn!("{}: discarding unacknowledged tail at byte {at}", path.display());
            file.set_len(at as u64).map_err(io_err)?;
            file.sync_all().map_err(io_err)?;
        }

        let mut store = Store {
            path: path.to_path_buf(),
            file,
            records: Vec::with_capacity(parsed.len()),
            acks: HashMap::new(),
            last_timestamp: 0,
        };
        for (_, r) in parsed {
            store.index(&r);
            store.records.push(r);
        }
        Ok(store)
    }

    fn index(&mut self, r: &AnnotationRecord) {
        let id = r.assignment_id.clone().unwrap_or_default();
        self.last_timestamp = self.last_timestamp.max(r.timestamp);
        self.acks
            .entry(id.clone())
            .and_modify(|a| a.records += 1)
            .or_insert(Ack {
                assignment_id: id,
                records: 1,
                timestamp: r.timestamp,
            });
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn ack(&self, assignment_id: &str) -> Option<&Ack> {
        self.acks.get(assignment_id)
    }

    pub fn is_submitted(&self, assignment_id: &str) -> bool {
        self.acks.contains_key(assignment_id)
    }

    pub fn submitted(&self) -> usize {
        self.acks.len()
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    /// Timestamp for the next submission: wall clock, forced strictly
    /// increasing so log order and timestamp order agree.
    pub fn next_timestamp(&self, now_ms: u64) -> u64 {
        now_ms.max(self.last_timestamp + 1)
    }

    /// Appends one submission and syncs it to disk.
    pub fn append(&mut self, records: Vec<AnnotationRecord>) -> Result<Ack, StoreError> {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &records).expect("writing to a Vec cannot fail");
        let io_err = |source| StoreError::Io {
            path: self.path.clone(),
            source,
        };
        self.file.write_all(&buf).map_err(io_err)?;
        self.file.sync_data().map_err(io_err)?;
        for r in records {
            self.index(&r);
            self.records.push(r);
        }
        let id = self.records.last().and_then(|r| r.assignment_id.clone()).unwrap_or_default();
        Ok(self.acks[&id].clone())
    }

    /// Accepted records in submission order, optionally of one task kind.
    pub fn export(&self, kind: Option<TaskKind>) -> Vec<u8> {
        let picked: Vec<AnnotationRecord> = self
            .records
            .iter()
            .filter(|r| kind.is_none_or(|k| r.task == k))
            .cloned()
            .collect();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &picked).expect("writing to a Vec cannot fail");
        buf
    }
}
