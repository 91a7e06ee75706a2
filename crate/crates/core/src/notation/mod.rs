//! Text notations for composite objects and diagram export.

pub mod bipartite;
pub mod dot;
pub mod tensorial;

pub use bipartite::{parse_bipartite, print_bipartite};
pub use dot::to_dot;
pub use tensorial::{
    infer_registry, parse_tensorial, parse_tensorial_inferred, parse_term, print_tensorial, print_tensorial_literal,
    Factor, Index, Side, TensorialTerm,
};

use crate::error::{Error, Result};

/// Byte cursor shared by both grammars.
pub(crate) struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Cursor { text, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_str(&mut self, s: &str) -> bool {
        if self.text[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`, found {}", self.describe())))
        }
    }

    pub(crate) fn describe(&self) -> String {
        match self.peek() {
            Some(c) => format!("`{c}`"),
            None => "end of input".into(),
        }
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        Error::syntax(self.pos, msg)
    }

    /// A run of characters, the first satisfying `first` and the rest `rest`.
    pub(crate) fn word(&mut self, first: fn(char) -> bool, rest: fn(char) -> bool) -> Option<&'a str> {
        let start = self.pos;
        match self.peek() {
            Some(c) if first(c) => self.pos += c.len_utf8(),
            _ => return None,
        }
        while let Some(c) = self.peek() {
            if !rest(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        Some(&self.text[start..self.pos])
    }

    pub(crate) fn name(&mut self) -> Option<&'a str> {
        self.word(|c| c.is_ascii_uppercase(), |c| c.is_ascii_alphanumeric())
    }

    pub(crate) fn join_token(&mut self) -> Option<&'a str> {
        self.word(|c| c.is_ascii_lowercase(), |c| c.is_ascii_alphanumeric())
    }

    pub(crate) fn port_id(&mut self) -> Option<&'a str> {
        self.word(|c| c.is_ascii_alphanumeric() || c == '_', |c| c.is_ascii_alphanumeric() || c == '_')
    }

    pub(crate) fn integer<T: std::str::FromStr>(&mut self) -> Result<T> {
        let start = self.pos;
        let Some(digits) = self.word(|c| c.is_ascii_digit(), |c| c.is_ascii_digit()) else {
            return Err(self.error(format!("expected an integer, found {}", self.describe())));
        };
        digits.parse().map_err(|_| Error::syntax(start, format!("integer `{digits}` is out of range")))
    }
}

pub(crate) fn is_join_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric())
}
