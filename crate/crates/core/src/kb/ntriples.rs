//! Line-oriented N-Triples reader.
//!
//! Accepts IRIs in angle brackets, blank nodes and literals (with optional
//! language tag or datatype, both dropped). Compact IRIs whose prefix is in
//! the profile's table are expanded.

use std::io::BufRead;

use crate::error::LoadError;
use crate::kb::profile::PrefixTable;
use crate::kb::term::{Iri, Term, Triple};

/// Reads every triple from `reader`. Blank lines and `#` comments are
/// skipped.
pub fn read_ntriples<R: BufRead>(reader: R, prefixes: &PrefixTable) -> Result<Vec<Triple>, LoadError> {
    let mut triples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(triple) = parse_line(&line, prefixes)
            .map_err(|message| LoadError::NTriples { line: idx + 1, message })?
        {
            triples.push(triple);
        }
    }
    Ok(triples)
}

/// Parses one line; `Ok(None)` for blank or comment lines.
pub fn parse_line(line: &str, prefixes: &PrefixTable) -> Result<Option<Triple>, String> {
    let mut cursor = Cursor { rest: line };
    cursor.skip_ws();
    if cursor.rest.is_empty() || cursor.rest.starts_with('#') {
        return Ok(None);
    }
    let subject = match cursor.term(prefixes)? {
        t @ (Term::Iri(_) | Term::Blank(_)) => t,
        Term::Literal(_) => return Err("literal in subject position".into()),
    };
    cursor.skip_ws();
    let predicate = match cursor.term(prefixes)? {
        Term::Iri(iri) => iri,
        _ => return Err("predicate must be an IRI".into()),
    };
    cursor.skip_ws();
    let object = cursor.term(prefixes)?;
    cursor.skip_ws();
    if !cursor.eat('.') {
        return Err("missing terminal '.'".into());
    }
    cursor.skip_ws();
    if !(cursor.rest.is_empty() || cursor.rest.starts_with('#')) {
        return Err(format!("unexpected trailing text {:?}", cursor.rest));
    }
    Ok(Some(Triple { subject, predicate, object }))
}

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t', '\r']);
    }

    fn eat(&mut self, c: char) -> bool {
        match self.rest.strip_prefix(c) {
            Some(rest) => {
                self.rest = rest;
                true
            }
            None => false,
        }
    }

    fn term(&mut self, prefixes: &PrefixTable) -> Result<Term, String> {
        if self.eat('<') {
            let end = self.rest.find('>').ok_or("unterminated IRI")?;
            let raw = &self.rest[..end];
            self.rest = &self.rest[end + 1..];
            return Iri::new(prefixes.expand(raw)).map(Term::Iri).map_err(|e| e.to_string());
        }
        if let Some(rest) = self.rest.strip_prefix("_:") {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            // A label may contain '.', but not as its last character.
            let label = rest[..end].trim_end_matches('.');
            if label.is_empty() {
                return Err("empty blank node label".into());
            }
            self.rest = &rest[label.len()..];
            return Ok(Term::Blank(label.to_string()));
        }
        if self.eat('"') {
            let lexical = self.string_body()?;
            if self.eat('@') {
                let end = self
                    .rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                    .unwrap_or(self.rest.len());
                if end == 0 {
                    return Err("empty language tag".into());
                }
                self.rest = &self.rest[end..];
            } else if let Some(rest) = self.rest.strip_prefix("^^") {
                self.rest = rest;
                if !self.rest.starts_with('<') {
                    return Err("datatype must be an IRI".into());
                }
                self.term(prefixes)?;
            }
            return Ok(Term::Literal(lexical));
        }
        Err(match self.rest.chars().next() {
            Some(c) => format!("unexpected character {c:?}"),
            None => "unexpected end of line".into(),
        })
    }

    fn string_body(&mut self) -> Result<String, String> {
        let mut out = String::new();
        let mut chars = self.rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.rest = &self.rest[i + 1..];
                    return Ok(out);
                }
                '\\' => {
                    let (_, esc) = chars.next().ok_or("dangling escape")?;
                    match esc {
                        't' => out.push('\t'),
                        'b' => out.push('\u{8}'),
                        'n' => out.push('\n'),
                        'r' => out.push('\r'),
                        'f' => out.push('\u{c}'),
                        '"' => out.push('"'),
                        '\'' => out.push('\''),
                        '\\' => out.push('\\'),
                        'u' | 'U' => {
                            let len = if esc == 'u' { 4 } else { 8 };
                            let hex: String = chars.by_ref().take(len).map(|(_, c)| c).collect();
                            if hex.len() != len {
                                return Err("truncated unicode escape".into());
                            }
                            let code = u32::from_str_radix(&hex, 16).map_err(|_| "bad unicode escape")?;
                            out.push(char::from_u32(code).ok_or("invalid code point")?);
                        }
                        other => return Err(format!("unknown escape \\{other}")),
                    }
                }
                c => out.push(c),
            }
        }
        Err("unterminated literal".into())
    }
}
