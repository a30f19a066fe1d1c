//! Minimal s-expression reader and printer.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(s: impl Into<String>) -> Sexp {
        Sexp::Atom(s.into())
    }

    pub fn list(items: Vec<Sexp>) -> Sexp {
        Sexp::List(items)
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::Atom(_) => None,
            Sexp::List(items) => Some(items),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s) => write!(f, "{}", s),
            Sexp::List(items) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", it)?;
                }
                write!(f, ")")
            }
        }
    }
}

pub struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(src: &'a str) -> Self {
        Reader {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c == b';' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Reads the next s-expression, or None at end of input.
    pub fn next(&mut self) -> Result<Option<Sexp>, String> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        Ok(Some(self.read_one()?))
    }

    fn read_one(&mut self) -> Result<Sexp, String> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Err("unexpected end of input".into());
        }
        match self.src[self.pos] {
            b'(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.pos >= self.src.len() {
                        return Err("unbalanced parenthesis".into());
                    }
                    if self.src[self.pos] == b')' {
                        self.pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    items.push(self.read_one()?);
                }
            }
            b')' => Err("unexpected ')'".into()),
            b'|' => {
                // quoted symbol
                let start = self.pos + 1;
                let mut end = start;
                while end < self.src.len() && self.src[end] != b'|' {
                    end += 1;
                }
                if end >= self.src.len() {
                    return Err("unterminated quoted symbol".into());
                }
                self.pos = end + 1;
                Ok(Sexp::Atom(
                    String::from_utf8_lossy(&self.src[start..end]).into_owned(),
                ))
            }
            b'"' => {
                let start = self.pos;
                let mut end = self.pos + 1;
                while end < self.src.len() && self.src[end] != b'"' {
                    end += 1;
                }
                if end >= self.src.len() {
                    return Err("unterminated string".into());
                }
                self.pos = end + 1;
                Ok(Sexp::Atom(
                    String::from_utf8_lossy(&self.src[start..=end]).into_owned(),
                ))
            }
            _ => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b';' {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(Sexp::Atom(
                    String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(),
                ))
            }
        }
    }
}

/// True when `text` contains only complete s-expressions (balanced parens
/// outside of quotes). Used by the REPL to decide when a command is complete.
pub fn balanced(text: &str) -> bool {
    let mut depth: i64 = 0;
    let mut quoted = false;
    for c in text.chars() {
        match c {
            '|' => quoted = !quoted,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return true; // malformed; let the parser report it
        }
    }
    depth == 0 && !quoted
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested() {
        let mut r = Reader::new("(assert (<= x 1)) ; comment\n(check-sat)");
        let a = r.next().unwrap().unwrap();
        assert_eq!(a.to_string(), "(assert (<= x 1))");
        let b = r.next().unwrap().unwrap();
        assert_eq!(b.to_string(), "(check-sat)");
        assert!(r.next().unwrap().is_none());
    }
}
