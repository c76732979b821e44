//! Operator-precedence term parser over the token stream.

use super::lexer::{Token, TokenKind};
use crate::term::{Term, VarSupply};
use std::collections::HashMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

#[derive(Clone, Copy, Debug)]
pub struct OpDef {
    pub priority: u32,
    pub op_type: OpType,
}

/// The fixed ISO-core operator table; user-defined operators are not
/// supported.
#[derive(Clone, Debug)]
pub struct OperatorTable {
    infix: HashMap<String, OpDef>,
    prefix: HashMap<String, OpDef>,
}

impl OperatorTable {
    pub fn empty() -> OperatorTable {
        OperatorTable {
            infix: HashMap::new(),
            prefix: HashMap::new(),
        }
    }

    pub fn add(&mut self, name: &str, priority: u32, op_type: OpType) {
        assert!((1..=1200).contains(&priority));
        let def = OpDef { priority, op_type };
        match op_type {
            OpType::Xfx | OpType::Xfy | OpType::Yfx | OpType::Xf | OpType::Yf => {
                self.infix.insert(name.to_string(), def);
            }
            OpType::Fy | OpType::Fx => {
                self.prefix.insert(name.to_string(), def);
            }
        }
    }

    pub fn infix(&self, name: &str) -> Option<OpDef> {
        self.infix.get(name).copied()
    }

    pub fn prefix(&self, name: &str) -> Option<OpDef> {
        self.prefix.get(name).copied()
    }

    pub fn is_operator(&self, name: &str) -> bool {
        self.infix.contains_key(name) || self.prefix.contains_key(name)
    }
}

impl Default for OperatorTable {
    fn default() -> OperatorTable {
        let mut t = OperatorTable::empty();
        t.add(":-", 1200, OpType::Xfx);
        t.add(":-", 1200, OpType::Fx);
        t.add("?-", 1200, OpType::Fx);
        t.add("-->", 1200, OpType::Xfx);
        t.add(";", 1100, OpType::Xfy);
        t.add("->", 1050, OpType::Xfy);
        t.add(",", 1000, OpType::Xfy);
        t.add("\\+", 900, OpType::Fy);
        for op in ["=", "\\=", "==", "\\==", "is", "<", ">", "=<", ">=", "=:=", "=\\=", "=..", "=>"] {
            t.add(op, 700, OpType::Xfx);
        }
        t.add("+", 500, OpType::Yfx);
        t.add("-", 500, OpType::Yfx);
        t.add("*", 400, OpType::Yfx);
        t.add("/", 400, OpType::Yfx);
        t.add("//", 400, OpType::Yfx);
        t.add("mod", 400, OpType::Yfx);
        t.add("-", 200, OpType::Fy);
        t
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{msg} at line {line}, column {column}")]
pub struct ParseError {
    pub msg: String,
    pub line: u32,
    pub column: u32,
}

pub struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    table: &'a OperatorTable,
    supply: &'a mut VarSupply,
    /// Variables named by the source, shared within one clause;
    /// `_`-prefixed names are fresh on every occurrence.
    var_map: HashMap<String, String>,
}

impl<'a> Parser<'a> {
    pub fn new(tokens: &'a [Token], table: &'a OperatorTable, supply: &'a mut VarSupply) -> Self {
        Parser {
            tokens,
            pos: 0,
            table,
            supply,
            var_map: HashMap::new(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, msg: impl Into<String>) -> ParseError {
        let (line, column) = match self.peek() {
            Some(t) => (t.line, t.column),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.column))
                .unwrap_or((1, 1)),
        };
        ParseError {
            msg: msg.into(),
            line,
            column,
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Punct && t.text == p => {
                self.bump();
                Ok(())
            }
            Some(t) => Err(self.err_at(format!("expected '{p}', found '{}'", t.text))),
            None => Err(self.err_at(format!("expected '{p}', found end of input"))),
        }
    }

    fn var_term(&mut self, name: &str) -> Term {
        if name.starts_with('_') {
            // anonymous: fresh on each occurrence
            return self.supply.fresh_var();
        }
        if let Some(n) = self.var_map.get(name) {
            return Term::Var(n.clone());
        }
        self.var_map.insert(name.to_string(), name.to_string());
        Term::Var(name.to_string())
    }

    /// Parses one term of priority at most `max_prec`.
    pub fn parse(&mut self, max_prec: u32) -> Result<Term, ParseError> {
        let (mut left, mut left_prec) = self.parse_primary(max_prec)?;
        loop {
            let (name, def) = match self.peek() {
                Some(t) if t.kind == TokenKind::Punct && t.text == "," && max_prec >= 1000 => {
                    (",".to_string(), OpDef { priority: 1000, op_type: OpType::Xfy })
                }
                Some(t) if t.kind == TokenKind::Atom => match self.table.infix(&t.text) {
                    Some(def) => (t.text.clone(), def),
                    None => break,
                },
                _ => break,
            };
            if def.priority > max_prec {
                break;
            }
            let (left_max, right_max) = match def.op_type {
                OpType::Xfx => (def.priority - 1, def.priority - 1),
                OpType::Xfy => (def.priority - 1, def.priority),
                OpType::Yfx => (def.priority, def.priority - 1),
                _ => break,
            };
            if left_prec > left_max {
                break;
            }
            self.bump();
            let right = self.parse(right_max)?;
            left = Term::Compound(name, vec![left, right]);
            left_prec = def.priority;
        }
        Ok(left)
    }

    /// Parses a primary (operand, possibly prefixed). Returns the term and
    /// its priority.
    fn parse_primary(&mut self, max_prec: u32) -> Result<(Term, u32), ParseError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.err_at("unexpected end of input")),
        };
        match tok.kind {
            TokenKind::Int => {
                self.bump();
                let v: i64 = tok
                    .text
                    .parse()
                    .map_err(|_| self.err_at("integer out of range"))?;
                Ok((Term::Int(v), 0))
            }
            TokenKind::Var => {
                self.bump();
                let t = self.var_term(&tok.text);
                Ok((t, 0))
            }
            TokenKind::Punct => match tok.text.as_str() {
                "(" => {
                    self.bump();
                    let t = self.parse(1200)?;
                    self.expect_punct(")")?;
                    Ok((t, 0))
                }
                "[" => {
                    self.bump();
                    let t = self.parse_list()?;
                    Ok((t, 0))
                }
                "{" => {
                    self.bump();
                    if let Some(t) = self.peek() {
                        if t.kind == TokenKind::Punct && t.text == "}" {
                            self.bump();
                            return Ok((Term::atom("{}"), 0));
                        }
                    }
                    let inner = self.parse(1200)?;
                    self.expect_punct("}")?;
                    Ok((Term::Compound("{}".into(), vec![inner]), 0))
                }
                other => Err(self.err_at(format!("unexpected '{other}'"))),
            },
            TokenKind::QuotedAtom | TokenKind::Atom => {
                self.bump();
                let name = tok.text.clone();
                // functional notation: atom immediately followed by '('
                if let Some(next) = self.peek() {
                    if next.kind == TokenKind::Punct && next.text == "(" && next.adjacent {
                        self.bump();
                        let args = self.parse_arglist()?;
                        self.expect_punct(")")?;
                        return Ok((Term::Compound(name, args), 0));
                    }
                }
                // negative numeric literal
                if tok.kind == TokenKind::Atom && name == "-" {
                    if let Some(next) = self.peek() {
                        if next.kind == TokenKind::Int {
                            let text = next.text.clone();
                            self.bump();
                            let v: i64 = text
                                .parse()
                                .map_err(|_| self.err_at("integer out of range"))?;
                            return Ok((Term::Int(-v), 0));
                        }
                    }
                }
                // prefix operator
                if tok.kind == TokenKind::Atom {
                    if let Some(def) = self.table.prefix(&name) {
                        if def.priority <= max_prec && self.starts_term() {
                            let arg_max = match def.op_type {
                                OpType::Fy => def.priority,
                                _ => def.priority - 1,
                            };
                            let arg = self.parse(arg_max)?;
                            return Ok((Term::Compound(name, vec![arg]), def.priority));
                        }
                    }
                }
                Ok((Term::Atom(name), 0))
            }
            TokenKind::End => Err(self.err_at("unexpected end of clause")),
        }
    }

    // Can the next token start a term (for prefix-operator disambiguation)?
    fn starts_term(&self) -> bool {
        match self.peek() {
            Some(t) => match t.kind {
                TokenKind::Int | TokenKind::Var | TokenKind::QuotedAtom => true,
                TokenKind::Atom => !self.table.infix.contains_key(&t.text) || self.table.prefix.contains_key(&t.text),
                TokenKind::Punct => matches!(t.text.as_str(), "(" | "[" | "{"),
                TokenKind::End => false,
            },
            None => false,
        }
    }

    fn parse_arglist(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = vec![self.parse(999)?];
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Punct && t.text == "," {
                self.bump();
                args.push(self.parse(999)?);
            } else {
                break;
            }
        }
        Ok(args)
    }

    fn parse_list(&mut self) -> Result<Term, ParseError> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Punct && t.text == "]" {
                self.bump();
                return Ok(Term::nil());
            }
        }
        let mut items = vec![self.parse(999)?];
        let mut tail = Term::nil();
        loop {
            match self.peek() {
                Some(t) if t.kind == TokenKind::Punct && t.text == "," => {
                    self.bump();
                    items.push(self.parse(999)?);
                }
                Some(t) if t.kind == TokenKind::Punct && t.text == "|" => {
                    self.bump();
                    tail = self.parse(999)?;
                    break;
                }
                _ => break,
            }
        }
        self.expect_punct("]")?;
        Ok(Term::partial_list(items, tail))
    }

    /// Parses one full term terminated by an End token.
    pub fn parse_clause_term(&mut self) -> Result<Term, ParseError> {
        let t = self.parse(1200)?;
        match self.peek() {
            Some(tok) if tok.kind == TokenKind::End => {
                self.bump();
                Ok(t)
            }
            Some(tok) => Err(self.err_at(format!("operator clash or trailing token '{}'", tok.text))),
            None => Err(self.err_at("missing '.' at end of clause")),
        }
    }

    pub fn at_eof(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    /// Skips to just past the next End token (error recovery).
    pub fn recover(&mut self) {
        while let Some(t) = self.bump() {
            if t.kind == TokenKind::End {
                break;
            }
        }
    }

    pub fn clear_clause_scope(&mut self) {
        self.var_map.clear();
    }
}
