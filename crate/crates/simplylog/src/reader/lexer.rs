//! Tokenizer for the Prolog-subset concrete syntax.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TokenKind {
    Atom,
    QuotedAtom,
    Var,
    Int,
    Punct,
    End,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
    /// True when the token directly follows the previous one with no
    /// intervening layout; distinguishes `f(x)` from `f (x)`.
    pub adjacent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{msg} at line {line}, column {column}")]
pub struct LexError {
    pub msg: String,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Atom => "atom",
            TokenKind::QuotedAtom => "quoted atom",
            TokenKind::Var => "variable",
            TokenKind::Int => "integer",
            TokenKind::Punct => "punctuation",
            TokenKind::End => "end",
        };
        f.write_str(s)
    }
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
    after_layout: bool,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
            after_layout: true,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        match c {
            Some('\n') => {
                self.line += 1;
                self.column = 1;
            }
            Some(_) => self.column += 1,
            None => {}
        }
        c
    }

    fn err(&self, msg: impl Into<String>) -> LexError {
        LexError {
            msg: msg.into(),
            line: self.line,
            column: self.column,
        }
    }

    fn skip_layout(&mut self) -> Result<(), LexError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                    self.after_layout = true;
                }
                Some('%') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                    self.after_layout = true;
                }
                Some('/') => {
                    // block comment only if followed by '*'
                    let mut clone = self.chars.clone();
                    clone.next();
                    if clone.peek() == Some(&'*') {
                        let (line, column) = (self.line, self.column);
                        self.bump();
                        self.bump();
                        loop {
                            match self.bump() {
                                Some('*') if self.peek() == Some('/') => {
                                    self.bump();
                                    break;
                                }
                                Some(_) => {}
                                None => {
                                    return Err(LexError {
                                        msg: "unterminated block comment".into(),
                                        line,
                                        column,
                                    })
                                }
                            }
                        }
                        self.after_layout = true;
                    } else {
                        return Ok(());
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, LexError> {
        self.skip_layout()?;
        let (line, column) = (self.line, self.column);
        let adjacent = !self.after_layout;
        self.after_layout = false;
        let c = match self.peek() {
            Some(c) => c,
            None => return Ok(None),
        };
        let tok = |kind, text: String| Token {
            kind,
            text,
            line,
            column,
            adjacent,
        };
        if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(d) = self.peek() {
                if d.is_ascii_digit() {
                    text.push(d);
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok(Some(tok(TokenKind::Int, text)));
        }
        if c == '_' || c.is_uppercase() {
            let mut text = String::new();
            while let Some(d) = self.peek() {
                if d == '_' || d.is_alphanumeric() {
                    text.push(d);
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok(Some(tok(TokenKind::Var, text)));
        }
        if c.is_lowercase() {
            let mut text = String::new();
            while let Some(d) = self.peek() {
                if d == '_' || d.is_alphanumeric() {
                    text.push(d);
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok(Some(tok(TokenKind::Atom, text)));
        }
        if c == '\'' {
            self.bump();
            let mut text = String::new();
            loop {
                match self.bump() {
                    Some('\'') => {
                        if self.peek() == Some('\'') {
                            self.bump();
                            text.push('\'');
                        } else {
                            break;
                        }
                    }
                    Some('\\') => match self.bump() {
                        Some('n') => text.push('\n'),
                        Some('t') => text.push('\t'),
                        Some('\\') => text.push('\\'),
                        Some('\'') => text.push('\''),
                        Some(other) => {
                            return Err(self.err(format!("unknown escape \\{other}")))
                        }
                        None => {
                            return Err(LexError {
                                msg: "unterminated quoted atom".into(),
                                line,
                                column,
                            })
                        }
                    },
                    Some(d) => text.push(d),
                    None => {
                        return Err(LexError {
                            msg: "unterminated quoted atom".into(),
                            line,
                            column,
                        })
                    }
                }
            }
            return Ok(Some(tok(TokenKind::QuotedAtom, text)));
        }
        if "()[]{},|".contains(c) {
            self.bump();
            return Ok(Some(tok(TokenKind::Punct, c.to_string())));
        }
        if c == '!' || c == ';' {
            self.bump();
            return Ok(Some(tok(TokenKind::Atom, c.to_string())));
        }
        if is_symbol_char(c) {
            let mut text = String::new();
            while let Some(d) = self.peek() {
                if is_symbol_char(d) {
                    text.push(d);
                    self.bump();
                } else {
                    break;
                }
            }
            // a lone '.' followed by layout or EOF ends the clause
            if text == "." {
                let next = self.peek();
                if next.is_none() || next.map(|d| d.is_whitespace() || d == '%').unwrap_or(false) {
                    return Ok(Some(tok(TokenKind::End, ".".into())));
                }
            }
            return Ok(Some(tok(TokenKind::Atom, text)));
        }
        Err(self.err(format!("unexpected character '{c}'")))
    }
}

/// Tokenizes `text`; comments are discarded, every clause terminator
/// becomes an `End` token.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer::new(text);
    let mut out = Vec::new();
    while let Some(t) = lx.next_token()? {
        out.push(t);
    }
    Ok(out)
}
