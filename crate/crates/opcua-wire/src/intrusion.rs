//! Append-only JSONL log of client write activity.
//!
//! Every write a client attempts lands here, whether it succeeded or was
//! rejected, one JSON object per line. The file is the forensic record the
//! honeypot exists to produce, so entries are flushed as they happen.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::SystemTime;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct IntrusionEvent {
    /// RFC 3339 wall-clock time with millisecond precision.
    pub timestamp: String,
    /// Session id the request arrived on, or "-" before a session exists.
    pub session: String,
    pub operation: String,
    /// Target node, e.g. "ns=2;i=11".
    pub node: String,
    pub value: String,
    /// "Good" or the hex status the request was answered with.
    pub status: String,
}

impl IntrusionEvent {
    pub fn now(
        session: impl Into<String>,
        operation: impl Into<String>,
        node: impl Into<String>,
        value: impl Into<String>,
        status: impl Into<String>,
    ) -> IntrusionEvent {
        IntrusionEvent {
            timestamp: humantime::format_rfc3339_millis(SystemTime::now()).to_string(),
            session: session.into(),
            operation: operation.into(),
            node: node.into(),
            value: value.into(),
            status: status.into(),
        }
    }
}

enum Sink {
    File(File),
    Memory(Vec<String>),
}

pub struct IntrusionLog {
    sink: Mutex<Sink>,
}

impl IntrusionLog {
    /// Opens (or creates) a log file and appends to it.
    pub fn to_file(path: impl AsRef<Path>) -> io::Result<IntrusionLog> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(IntrusionLog {
            sink: Mutex::new(Sink::File(file)),
        })
    }

    /// Keeps entries in memory; used by tests and embedded servers.
    pub fn in_memory() -> IntrusionLog {
        IntrusionLog {
            sink: Mutex::new(Sink::Memory(Vec::new())),
        }
    }

    pub fn record(&self, event: &IntrusionEvent) -> io::Result<()> {
        let line = serde_json::to_string(event).expect("plain string fields always serialize");
        let mut sink = self.sink.lock().expect("intrusion log poisoned");
        match &mut *sink {
            Sink::File(file) => {
                writeln!(file, "{line}")?;
                file.flush()
            }
            Sink::Memory(lines) => {
                lines.push(line);
                Ok(())
            }
        }
    }

    /// Recorded lines when running in memory; empty for file-backed logs.
    pub fn entries(&self) -> Vec<String> {
        match &*self.sink.lock().expect("intrusion log poisoned") {
            Sink::File(_) => Vec::new(),
            Sink::Memory(lines) => lines.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_append_as_parseable_json_lines() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("intrusion.jsonl");
        let log = IntrusionLog::to_file(&path).expect("open");
        log.record(&IntrusionEvent::now("ns=1;i=100", "write", "ns=2;i=11", "0.3", "Good"))
            .expect("record");
        log.record(&IntrusionEvent::now(
            "ns=1;i=100",
            "write",
            "ns=2;i=2",
            "9.9",
            "0x803B0000",
        ))
        .expect("record");

        let text = std::fs::read_to_string(&path).expect("read back");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: serde_json::Value = serde_json::from_str(lines[0]).expect("json");
        assert_eq!(first["node"], "ns=2;i=11");
        assert_eq!(first["status"], "Good");
        assert!(first["timestamp"].as_str().unwrap().ends_with('Z'));
        let second: serde_json::Value = serde_json::from_str(lines[1]).expect("json");
        assert_eq!(second["status"], "0x803B0000");
    }

    #[test]
    fn in_memory_log_retains_lines() {
        let log = IntrusionLog::in_memory();
        log.record(&IntrusionEvent::now("-", "write", "ns=2;i=12", "1.0", "Good"))
            .expect("record");
        assert_eq!(log.entries().len(), 1);
        assert!(log.entries()[0].contains("\"ns=2;i=12\""));
    }
}
