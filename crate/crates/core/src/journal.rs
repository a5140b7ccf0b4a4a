//! Append-only record journal syntax.
//!
//! ```text
//! remis-rationale 1
//! record issue IS-1
//!   question = Should reviews be mandatory?
//!   status = open
//! end
//! transition issue IS-1 closed 2009-05-16T10:30:00Z
//! ```
//!
//! A `record` line for an id that already exists is an amendment; the
//! typed layer decides whether it is allowed.

use chrono::{DateTime, Utc};

use crate::clock::{format_timestamp, parse_timestamp};
use crate::metamodel::{check_header, doc_lines, ParseError};
use crate::text;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Record {
        line: usize,
        kind: String,
        id: String,
        fields: Vec<(String, String)>,
    },
    Transition {
        line: usize,
        kind: String,
        id: String,
        status: String,
        at: DateTime<Utc>,
    },
}

pub fn header(magic: &str) -> String {
    format!("{magic} {FORMAT_VERSION}\n")
}

pub fn record_block(kind: &str, id: &str, fields: &[(String, String)]) -> String {
    let mut out = format!("record {kind} {id}\n");
    for (k, v) in fields {
        out.push_str(&format!("  {k} = {}\n", text::format_value(v)));
    }
    out.push_str("end\n");
    out
}

pub fn transition_line(kind: &str, id: &str, status: &str, at: &DateTime<Utc>) -> String {
    format!("transition {kind} {id} {status} {}\n", format_timestamp(at))
}

fn bare<'a>(line: usize, tok: &'a text::Token, what: &str) -> Result<&'a str, ParseError> {
    if tok.quoted || !text::is_token(&tok.text) {
        Err(ParseError::syntax(line, tok.offset + 1, format!("{what} must match [A-Za-z0-9_.-]+")))
    } else {
        Ok(&tok.text)
    }
}

type OpenRecord = (usize, String, String, Vec<(String, String)>);

pub fn parse_journal(doc: &str, magic: &str) -> Result<Vec<Entry>, ParseError> {
    check_header(doc, magic, FORMAT_VERSION)?;
    let mut entries = Vec::new();
    // (line, kind, id, fields) of the record being read.
    let mut open: Option<OpenRecord> = None;

    for (lineno, line) in doc_lines(doc).skip(1) {
        let trimmed = line.trim_start_matches([' ', '\t']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indented = trimmed.len() != line.len();
        if let Some((_, _, _, fields)) = open.as_mut() {
            if indented {
                let Some(eq) = trimmed.find('=') else {
                    return Err(ParseError::syntax(lineno, 1, "expected `key = value`"));
                };
                let key = trimmed[..eq].trim_end();
                if !text::is_token(key) {
                    return Err(ParseError::syntax(lineno, 1, format!("invalid field key {key:?}")));
                }
                if fields.iter().any(|(k, _)| k == key) {
                    return Err(ParseError::syntax(lineno, 1, format!("duplicate field {key:?}")));
                }
                let base = line[..line.len() - trimmed.len() + eq + 1].chars().count() + 1;
                let value = text::parse_value(&trimmed[eq + 1..])
                    .map_err(|e| ParseError::from_lex(lineno, base, e))?;
                fields.push((key.to_string(), value));
                continue;
            }
            if trimmed.trim_end() == "end" {
                let (line, kind, id, fields) = open.take().expect("open record");
                entries.push(Entry::Record { line, kind, id, fields });
                continue;
            }
            return Err(ParseError::syntax(lineno, 1, "expected `end` to close the record"));
        }
        if indented {
            return Err(ParseError::syntax(lineno, 1, "field line outside a record"));
        }
        let toks = text::split_tokens(line).map_err(|e| ParseError::from_lex(lineno, 1, e))?;
        match (toks[0].text.as_str(), toks.len()) {
            ("record", 3) => {
                let kind = bare(lineno, &toks[1], "record kind")?.to_string();
                let id = bare(lineno, &toks[2], "record id")?.to_string();
                open = Some((lineno, kind, id, Vec::new()));
            }
            ("transition", 5) => {
                let kind = bare(lineno, &toks[1], "record kind")?.to_string();
                let id = bare(lineno, &toks[2], "record id")?.to_string();
                let status = bare(lineno, &toks[3], "status")?.to_string();
                let at = parse_timestamp(&toks[4].text).ok_or_else(|| {
                    ParseError::syntax(lineno, toks[4].offset + 1, "invalid RFC 3339 timestamp")
                })?;
                entries.push(Entry::Transition { line: lineno, kind, id, status, at });
            }
            _ => {
                return Err(ParseError::syntax(
                    lineno,
                    1,
                    "expected `record <kind> <id>` or `transition <kind> <id> <status> <timestamp>`",
                ))
            }
        }
    }
    if let Some((line, ..)) = open {
        return Err(ParseError::syntax(line, 1, "record is missing its `end` line"));
    }
    Ok(entries)
}
