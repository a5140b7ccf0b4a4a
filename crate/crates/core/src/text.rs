//! Lexical rules shared by every on-disk document: tokens, bare and quoted
//! values, and whitespace-separated token lines.

/// `[A-Za-z0-9_.-]+`
pub fn is_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_token_char)
}

fn is_token_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

/// A value may be written without quotes iff it is non-empty, made of
/// `[A-Za-z0-9_. -]` and does not start or end with a space.
pub fn is_bare_value(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with(' ')
        && !s.ends_with(' ')
        && s.chars().all(|c| is_token_char(c) || c == ' ')
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Value on the right of `key = `; may contain inner spaces unquoted.
pub fn format_value(s: &str) -> String {
    if is_bare_value(s) {
        s.to_string()
    } else {
        quote(s)
    }
}

/// Value inside a whitespace-separated token line. Inner spaces would split
/// the token, so they force quoting here.
pub fn format_token_value(s: &str) -> String {
    if is_bare_value(s) && !s.contains(' ') {
        s.to_string()
    } else {
        quote(s)
    }
}

/// Lexing failure, with a 0-based char offset into the scanned text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

impl LexError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        LexError {
            offset,
            message: message.into(),
        }
    }
}

/// Reads a quoted string starting at `chars[start] == '"'`. Returns the
/// unescaped text and the index just past the closing quote.
fn read_quoted(chars: &[char], start: usize) -> Result<(String, usize), LexError> {
    let mut out = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            '"' => return Ok((out, i + 1)),
            '\\' => {
                let esc = chars
                    .get(i + 1)
                    .ok_or_else(|| LexError::new(i, "dangling escape at end of line"))?;
                match esc {
                    '\\' => out.push('\\'),
                    '"' => out.push('"'),
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    other => {
                        return Err(LexError::new(i, format!("unknown escape \\{other}")))
                    }
                }
                i += 2;
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    Err(LexError::new(start, "unterminated quoted value"))
}

/// Parses the value part of a `key = value` line. Quoted values must be
/// followed only by whitespace; bare values are the trimmed remainder.
pub fn parse_value(s: &str) -> Result<String, LexError> {
    let chars: Vec<char> = s.chars().collect();
    let lead = chars.iter().take_while(|c| **c == ' ' || **c == '\t').count();
    if chars.get(lead) == Some(&'"') {
        let (value, end) = read_quoted(&chars, lead)?;
        if let Some(pos) = chars[end..].iter().position(|c| *c != ' ' && *c != '\t') {
            return Err(LexError::new(end + pos, "unexpected text after quoted value"));
        }
        Ok(value)
    } else {
        Ok(s.trim_matches(|c| c == ' ' || c == '\t').to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub quoted: bool,
    /// 0-based char offset of the token start.
    pub offset: usize,
}

impl Token {
    /// The reserved `!none` marker; only recognized unquoted.
    pub fn is_none_marker(&self) -> bool {
        !self.quoted && self.text == "!none"
    }
}

/// Splits a line into space-separated tokens, honouring quoted strings.
pub fn split_tokens(line: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == ' ' || chars[i] == '\t' {
            i += 1;
            continue;
        }
        let start = i;
        if chars[i] == '"' {
            let (text, end) = read_quoted(&chars, i)?;
            if end < chars.len() && chars[end] != ' ' && chars[end] != '\t' {
                return Err(LexError::new(end, "missing space after quoted value"));
            }
            tokens.push(Token {
                text,
                quoted: true,
                offset: start,
            });
            i = end;
        } else {
            while i < chars.len() && chars[i] != ' ' && chars[i] != '\t' {
                if chars[i] == '"' {
                    return Err(LexError::new(i, "quote inside bare token"));
                }
                i += 1;
            }
            tokens.push(Token {
                text: chars[start..i].iter().collect(),
                quoted: false,
                offset: start,
            });
        }
    }
    Ok(tokens)
}

/// Reads a required `<header> <version>` first line and returns the version text.
pub fn header_version<'a>(first_line: Option<&'a str>, magic: &str) -> Option<&'a str> {
    let line = first_line?;
    let rest = line.strip_prefix(magic)?.strip_prefix(' ')?;
    Some(rest.trim_end())
}
