use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Judgment, ServiceError, SessionHeader};
use crate::eval::Condition;

/// One line of the session log. The first line is always `Session`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LogRecord {
    Session(SessionHeader),
    Assignment { worker_id: String, condition: Condition },
    Judgment(Judgment),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogContents {
    pub header: SessionHeader,
    pub assignments: Vec<(String, Condition)>,
    pub judgments: Vec<Judgment>,
    /// Bytes after the last newline, left by an interrupted write.
    pub torn_bytes: usize,
}

/// Parse a log. A trailing unterminated line is ignored and reported in
/// `torn_bytes`; any other bad line is an error.
pub fn parse_log(bytes: &[u8]) -> Result<Option<LogContents>, ServiceError> {
    let complete = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
    let mut header = None;
    let mut assignments = Vec::new();
    let mut judgments = Vec::new();
    for (i, line) in bytes[..complete].split(|b| *b == b'\n').enumerate() {
        if line.is_empty() {
            continue;
        }
        let corrupt = |message: String| ServiceError::Corrupt { line: i + 1, message };
        let record: LogRecord = serde_json::from_slice(line).map_err(|e| corrupt(e.to_string()))?;
        match (record, &header) {
            (LogRecord::Session(h), None) => header = Some(h),
            (LogRecord::Session(_), Some(_)) => return Err(corrupt("second session header".into())),
            (_, None) => return Err(corrupt("log does not start with a session header".into())),
            (LogRecord::Assignment { worker_id, condition }, Some(_)) => assignments.push((worker_id, condition)),
            (LogRecord::Judgment(j), Some(_)) => judgments.push(j),
        }
    }
    Ok(header.map(|header| LogContents {
        header,
        assignments,
        judgments,
        torn_bytes: bytes.len() - complete,
    }))
}

/// Read a log without modifying it.
pub fn read_log(path: impl AsRef<Path>) -> Result<LogContents, ServiceError> {
    let path = path.as_ref();
    parse_log(&std::fs::read(path)?)?.ok_or_else(|| ServiceError::Corrupt {
        line: 1,
        message: format!("{} has no session header", path.display()),
    })
}

/// Append-only, fsynced JSONL log.
#[derive(Debug)]
pub struct JudgmentLog {
    file: File,
}

impl JudgmentLog {
    /// Open `path`, truncating a torn final line. A new or empty log is
    /// started with `header`; an existing one must match it when given.
    pub fn open(path: &Path, header: Option<&SessionHeader>) -> Result<(Self, LogContents), ServiceError> {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let parsed = parse_log(&bytes)?;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut log = JudgmentLog { file };
        match parsed {
            Some(contents) => {
                if let Some(h) = header {
                    if *h != contents.header {
                        let what = if h.session != contents.header.session {
                            format!("session {:?} vs logged {:?}", h.session, contents.header.session)
                        } else {
                            "same session id, different items or settings".to_string()
                        };
                        return Err(ServiceError::HeaderMismatch(what));
                    }
                }
                if contents.torn_bytes > 0 {
                    log.file.set_len((bytes.len() - contents.torn_bytes) as u64)?;
                    log.file.sync_data()?;
                }
                Ok((log, contents))
            }
            None => {
                let h = header.ok_or_else(|| ServiceError::Corrupt {
                    line: 1,
                    message: format!("{} has no session header", path.display()),
                })?;
                log.file.set_len(0)?;
                log.append(&LogRecord::Session(h.clone()))?;
                let contents = LogContents {
                    header: h.clone(),
                    assignments: Vec::new(),
                    judgments: Vec::new(),
                    torn_bytes: 0,
                };
                Ok((log, contents))
            }
        }
    }

    /// Write one record and wait for it to reach the disk.
    pub fn append(&mut self, record: &LogRecord) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(record).map_err(std::io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.flush()?;
        self.file.sync_data()?;
        Ok(())
    }
}
