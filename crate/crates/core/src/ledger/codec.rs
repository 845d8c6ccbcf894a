//! JSON Lines persistence for event logs.
//!
//! One event per line, UTF-8, keys `{at, kind, payload, seq}` in
//! alphabetical order at every nesting level. `save_log` output is
//! canonical: loading and re-saving it reproduces the same bytes.

use serde_json::{Map, Value};

use super::event::{Event, EventKind, EventPayload};
use crate::model::SeqNo;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Reject unknown kinds and fields.
    #[default]
    Strict,
    /// Skip events of unknown kinds, recording them in [`LoadedLog::skipped`].
    Permissive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedEvent {
    pub line: usize,
    pub seq: SeqNo,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadedLog {
    pub events: Vec<Event>,
    pub skipped: Vec<SkippedEvent>,
}

fn event_to_value(event: &Event) -> Value {
    let mut obj = Map::new();
    obj.insert("at".into(), Value::String(event.at.clone()));
    obj.insert("kind".into(), Value::String(event.kind().as_str().into()));
    obj.insert("payload".into(), event.payload.to_json());
    obj.insert("seq".into(), Value::from(event.seq));
    Value::Object(obj)
}

/// Canonical single-line encoding of one event (no trailing newline).
pub fn encode_event(event: &Event) -> String {
    event_to_value(event).to_string()
}

pub fn save_log(events: &[Event]) -> Vec<u8> {
    let mut out = Vec::new();
    for event in events {
        out.extend_from_slice(encode_event(event).as_bytes());
        out.push(b'\n');
    }
    out
}

pub fn load_log(bytes: &[u8]) -> Result<Vec<Event>, ParseError> {
    load_log_with(bytes, ParseMode::Strict).map(|l| l.events)
}

pub fn load_log_with(bytes: &[u8], mode: ParseMode) -> Result<LoadedLog, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        ParseError {
            line,
            reason: "invalid UTF-8".into(),
        }
    })?;

    let mut log = LoadedLog::default();
    let mut last_seq: SeqNo = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fail = |reason: String| ParseError { line, reason };
        if raw.trim().is_empty() {
            return Err(fail("empty line".into()));
        }
        let value: Value =
            serde_json::from_str(raw).map_err(|e| fail(format!("invalid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(fail("event must be a JSON object".into()));
        };
        for key in obj.keys() {
            if !matches!(key.as_str(), "seq" | "at" | "kind" | "payload") {
                return Err(fail(format!("unknown field {key:?}")));
            }
        }
        let mut take = |key: &str| {
            obj.remove(key)
                .ok_or_else(|| fail(format!("missing field {key:?}")))
        };

        let seq = take("seq")?
            .as_u64()
            .filter(|&s| s > 0)
            .ok_or_else(|| fail("seq must be a positive integer".into()))?;
        let at = match take("at")? {
            Value::String(s) => s,
            _ => return Err(fail("at must be a string".into())),
        };
        let kind_name = match take("kind")? {
            Value::String(s) => s,
            _ => return Err(fail("kind must be a string".into())),
        };
        let payload = take("payload")?;

        if seq <= last_seq {
            let reason = if seq == last_seq {
                format!("duplicate seq {seq}")
            } else {
                format!("seq {seq} out of order after {last_seq}")
            };
            return Err(fail(reason));
        }
        if seq != last_seq + 1 {
            return Err(fail(format!(
                "non-consecutive seq: expected {}, got {seq}",
                last_seq + 1
            )));
        }
        last_seq = seq;

        if chrono::DateTime::parse_from_rfc3339(&at).is_err() {
            return Err(fail(format!("at {at:?} is not an ISO-8601 timestamp")));
        }

        let Some(kind) = EventKind::parse(&kind_name) else {
            match mode {
                ParseMode::Strict => return Err(fail(format!("unknown kind {kind_name:?}"))),
                ParseMode::Permissive => {
                    log.skipped.push(SkippedEvent {
                        line,
                        seq,
                        kind: kind_name,
                    });
                    continue;
                }
            }
        };
        let payload = EventPayload::from_json(kind, payload)
            .map_err(|e| fail(format!("invalid {kind_name} payload: {e}")))?;
        log.events.push(Event { seq, at, payload });
    }
    Ok(log)
}
