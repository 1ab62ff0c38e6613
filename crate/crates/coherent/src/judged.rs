//! Judged probabilities: line-delimited records
//! `{event_id, raw_text, parsed, mode, side?}`.
//!
//! Single-mode ids are `<pair>` for `A` and `<pair>:neg` for `¬A`. Joint-mode
//! records carry the pair id and `side` = `"event"` or `"complement"`.

use std::collections::BTreeMap;
use std::path::Path;

use coherent_core::eval::{ProbabilitySet, Source, Split};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const NEG_SUFFIX: &str = ":neg";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Single,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Event,
    Complement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgedRecord {
    pub event_id: String,
    pub raw_text: String,
    /// `None` when no number could be read from `raw_text`.
    pub parsed: Option<f64>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

impl JudgedRecord {
    /// Pair id and side this record answers.
    pub fn key(&self) -> Result<(&str, Side), String> {
        match (self.mode, self.side) {
            (Mode::Joint, Some(side)) => Ok((&self.event_id, side)),
            (Mode::Joint, None) => Err("joint record without a side".into()),
            (Mode::Single, Some(side)) => Ok((self.event_id.strip_suffix(NEG_SUFFIX).unwrap_or(&self.event_id), side)),
            (Mode::Single, None) => Ok(match self.event_id.strip_suffix(NEG_SUFFIX) {
                Some(id) => (id, Side::Complement),
                None => (&self.event_id, Side::Event),
            }),
        }
    }
}

/// Parses a judged-records file into a `judged` probability set.
///
/// Every pair needs both sides with a parsed value in `[0, 1]`; anything else is
/// an input error, since silently dropping failures would bias the averages.
pub fn parse_judged(path: &Path, text: &str, split: Split) -> CliResult<ProbabilitySet> {
    let bad = |line: usize, msg: String| CliError::Input(format!("{}:{line}: {msg}", path.display()));
    let mut sides: BTreeMap<String, [Option<f64>; 2]> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JudgedRecord = serde_json::from_str(line).map_err(|e| bad(n, e.to_string()))?;
        let (id, side) = rec.key().map_err(|e| bad(n, e))?;
        let value = rec
            .parsed
            .ok_or_else(|| bad(n, format!("no probability parsed for {}", rec.event_id)))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(bad(n, format!("parsed value {value} outside [0, 1]")));
        }
        let slot = &mut sides.entry(id.to_string()).or_default()[side as usize];
        if slot.replace(value).is_some() {
            return Err(bad(n, format!("duplicate judged record for {id} ({side:?})")));
        }
    }
    if sides.is_empty() {
        return Err(CliError::Input(format!("{}: no judged records", path.display())));
    }
    let mut ids = Vec::with_capacity(sides.len());
    let mut p = Vec::with_capacity(sides.len());
    let mut p_neg = Vec::with_capacity(sides.len());
    for (id, [a, b]) in sides {
        match (a, b) {
            (Some(a), Some(b)) => {
                ids.push(id);
                p.push(a);
                p_neg.push(b);
            }
            _ => {
                return Err(CliError::Input(format!(
                    "{}: pair {id} is missing its {} record",
                    path.display(),
                    if a.is_none() { "event" } else { "complement" }
                )))
            }
        }
    }
    Ok(ProbabilitySet::new(Source::Judged, split, ids, p, p_neg)?)
}

pub fn read_judged(path: &Path, split: Split) -> CliResult<ProbabilitySet> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_judged(path, &text, split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<ProbabilitySet> {
        parse_judged(Path::new("j.jsonl"), text, Split::Train)
    }

    #[test]
    fn single_and_joint_records() {
        let text = r#"{"event_id":"a","raw_text":"0.3","parsed":0.3,"mode":"single"}
{"event_id":"a:neg","raw_text":"about 0.6","parsed":0.6,"mode":"single"}
{"event_id":"b","raw_text":"0.1, 0.9","parsed":0.9,"mode":"joint","side":"complement"}
{"event_id":"b","raw_text":"0.1, 0.9","parsed":0.1,"mode":"joint","side":"event"}
"#;
        let set = parse(text).unwrap();
        assert_eq!(set.ids, ["a", "b"]);
        assert_eq!(set.p, [0.3, 0.1]);
        assert_eq!(set.p_neg, [0.6, 0.9]);
    }

    #[test]
    fn failures_are_input_errors() {
        let unparsed = r#"{"event_id":"a","raw_text":"no idea","parsed":null,"mode":"single"}"#;
        assert!(matches!(parse(unparsed), Err(CliError::Input(_))));
        let lonely = r#"{"event_id":"a","raw_text":"0.3","parsed":0.3,"mode":"single"}"#;
        assert!(parse(lonely).unwrap_err().to_string().contains("complement"));
        let dup = "{\"event_id\":\"a\",\"raw_text\":\"0.3\",\"parsed\":0.3,\"mode\":\"single\"}\n".repeat(2);
        assert!(parse(&dup).unwrap_err().to_string().contains("duplicate"));
        let range = r#"{"event_id":"a","raw_text":"30","parsed":30.0,"mode":"single"}"#;
        assert!(parse(range).is_err());
        let sideless = r#"{"event_id":"a","raw_text":"0.3","parsed":0.3,"mode":"joint"}"#;
        assert!(parse(sideless).is_err());
        assert!(parse("").is_err());
    }
}
