//! Line-delimited trace files: `seq kind key bytes` per event.

use omp2hls_core::sim::{TraceEvent, TraceKind};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

pub fn write_trace(events: &[TraceEvent]) -> String {
    events.iter().map(|e| format!("{e}\n")).collect()
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, TraceParseError> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: &str| TraceParseError {
            line,
            message: message.into(),
        };
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        let [seq, kind, key, bytes] = f[..] else {
            return Err(err("expected four fields"));
        };
        out.push(TraceEvent {
            seq: seq.parse().map_err(|_| err("bad sequence number"))?,
            kind: TraceKind::parse(kind).ok_or_else(|| err("unknown event kind"))?,
            key: key.into(),
            bytes: bytes.parse().map_err(|_| err("bad byte count"))?,
        });
    }
    Ok(out)
}
