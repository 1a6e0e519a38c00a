//! Line-oriented operation traces: `I <key>`, `D <key>`, `Q <key>`, `V`.

use crate::BenchError;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOp {
    Insert(i64),
    Delete(i64),
    Query(i64),
    Validate,
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceOp::Insert(k) => write!(f, "I {k}"),
            TraceOp::Delete(k) => write!(f, "D {k}"),
            TraceOp::Query(k) => write!(f, "Q {k}"),
            TraceOp::Validate => f.write_str("V"),
        }
    }
}

/// Parses a whole trace. Blank lines and lines starting with `#` are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<TraceOp>, BenchError> {
    let mut ops = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        ops.push(parse_line(line).map_err(|msg| BenchError::Parse { line: i + 1, msg })?);
    }
    Ok(ops)
}

fn parse_line(line: &str) -> Result<TraceOp, String> {
    let mut parts = line.split_whitespace();
    let kind = parts.next().unwrap_or_default();
    let raw_key = parts.next();
    if let Some(extra) = parts.next() {
        return Err(format!("unexpected trailing token `{extra}`"));
    }
    let key = || -> Result<i64, String> {
        let k = raw_key.ok_or_else(|| format!("`{kind}` needs a key"))?;
        k.parse().map_err(|_| format!("bad key `{k}`"))
    };
    match kind {
        "I" => Ok(TraceOp::Insert(key()?)),
        "D" => Ok(TraceOp::Delete(key()?)),
        "Q" => Ok(TraceOp::Query(key()?)),
        "V" if raw_key.is_none() => Ok(TraceOp::Validate),
        "V" => Err("`V` takes no key".into()),
        other => Err(format!("unknown operation `{other}`")),
    }
}

pub fn format_trace(ops: &[TraceOp]) -> String {
    let mut out = String::with_capacity(ops.len() * 10);
    for op in ops {
        out.push_str(&op.to_string());
        out.push('\n');
    }
    out
}
