//! A small s-expression reader with source positions.

use std::fmt;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    /// A plain or `|quoted|` symbol, numerals included.
    Symbol(String),
    /// A `"string"` literal.
    Str(String),
    List(Vec<SExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SExpr {
    pub kind: Kind,
    pub line: usize,
    pub col: usize,
}

impl SExpr {
    pub fn symbol(&self) -> Option<&str> {
        match &self.kind {
            Kind::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match &self.kind {
            Kind::List(xs) => Some(xs),
            _ => None,
        }
    }

    /// The head symbol and arguments of a list `(head args...)`.
    pub fn call(&self) -> Option<(&str, &[SExpr])> {
        let xs = self.list()?;
        let head = xs.first()?.symbol()?;
        Some((head, &xs[1..]))
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    pub fn expect_list(&self, what: &str) -> Result<&[SExpr], SyntaxError> {
        self.list().ok_or_else(|| self.error(format!("expected {what}")))
    }

    pub fn expect_symbol(&self, what: &str) -> Result<&str, SyntaxError> {
        self.symbol().ok_or_else(|| self.error(format!("expected {what}")))
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Symbol(s) => f.write_str(&quote_symbol(s)),
            Kind::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Kind::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn is_simple_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
}

/// Wraps a symbol in `|...|` unless it is a plain SMT-LIB symbol.
pub fn quote_symbol(s: &str) -> String {
    let simple = !s.is_empty() && s.chars().all(is_simple_char) && !s.starts_with(|c: char| c.is_ascii_digit());
    if simple {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<SExpr>, SyntaxError> {
        self.skip_blank();
        let (line, col) = (self.line, self.col);
        let at = |kind| SExpr { kind, line, col };
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => {
                            return Err(SyntaxError::Parse {
                                line,
                                col,
                                message: "unclosed parenthesis".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(at(Kind::List(items))));
                        }
                        Some(_) => items.push(self.read()?.expect("not at end")),
                    }
                }
            }
            ')' => Err(self.err("unexpected `)`")),
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated quoted symbol")),
                        Some('|') => return Ok(Some(at(Kind::Symbol(s)))),
                        Some(c) => s.push(c),
                    }
                }
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated string")),
                        Some('"') if self.chars.peek() == Some(&'"') => {
                            self.bump();
                            s.push('"');
                        }
                        Some('"') => return Ok(Some(at(Kind::Str(s)))),
                        Some(c) => s.push(c),
                    }
                }
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || "()|\";".contains(c) {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(at(Kind::Symbol(s))))
            }
        }
    }
}

/// Reads every top-level expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, SyntaxError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(e) = r.read()? {
        out.push(e);
    }
    Ok(out)
}

/// Reads exactly one expression.
pub fn read_one(text: &str) -> Result<SExpr, SyntaxError> {
    let mut all = read_all(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("one element")),
        0 => Err(SyntaxError::Parse {
            line: 1,
            col: 1,
            message: "empty input".into(),
        }),
        _ => Err(all[1].error("trailing input")),
    }
}
