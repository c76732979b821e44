//! Concrete syntax: tokenizing, parsing and printing programmes, queries,
//! DCG rules and first-order formulas. Every other module consumes
//! abstract terms only.

mod lexer;
mod parser;
mod printer;

pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{OpDef, OpType, OperatorTable, ParseError, Parser};
pub use printer::{write_term, write_term_prec, WriteOpts};

use crate::term::{Term, VarSupply};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClauseKind {
    Clause,
    Directive,
    DcgRule,
    Query,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    File { file: String, line: u32 },
    Repl { line: u32 },
}

/// One clause as read from source, before any engine-side processing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceClause {
    pub term: Term,
    pub origin: Origin,
    pub kind: ClauseKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReadError {
    #[error("lexical error: {0}")]
    Lex(#[from] LexError),
    #[error("syntax error: {0}")]
    Parse(#[from] ParseError),
}

fn classify(term: &Term) -> ClauseKind {
    match term {
        Term::Compound(f, args) if f == ":-" && args.len() == 1 => ClauseKind::Directive,
        Term::Compound(f, args) if f == "?-" && args.len() == 1 => ClauseKind::Query,
        Term::Compound(f, args) if f == "-->" && args.len() == 2 => ClauseKind::DcgRule,
        _ => ClauseKind::Clause,
    }
}

/// Parses one term (no clause terminator required at the end of input is
/// an error: the input must be exactly one term followed by `.`).
pub fn parse_term_with(
    text: &str,
    table: &OperatorTable,
    supply: &mut VarSupply,
) -> Result<Term, ReadError> {
    let mut tokens = tokenize(text)?;
    // allow a bare term without the trailing '.' for API convenience
    if !tokens.iter().any(|t| t.kind == TokenKind::End) {
        tokens.push(Token {
            kind: TokenKind::End,
            text: ".".into(),
            line: u32::MAX,
            column: 1,
            adjacent: false,
        });
    }
    let mut p = Parser::new(&tokens, table, supply);
    let t = p.parse_clause_term()?;
    if !p.at_eof() {
        return Err(ReadError::Parse(ParseError {
            msg: "trailing input after term".into(),
            line: 0,
            column: 0,
        }));
    }
    Ok(t)
}

pub fn parse_term(text: &str) -> Result<Term, ReadError> {
    let mut supply = VarSupply::new();
    parse_term_with(text, &OperatorTable::default(), &mut supply)
}

/// Result of reading a programme text: clauses read successfully plus all
/// accumulated errors (recovery skips to the next clause terminator).
#[derive(Clone, Debug, Default)]
pub struct ProgramSource {
    pub clauses: Vec<SourceClause>,
    pub errors: Vec<ReadError>,
}

pub fn parse_program_with(
    text: &str,
    origin_file: Option<&str>,
    table: &OperatorTable,
    supply: &mut VarSupply,
) -> ProgramSource {
    let mut out = ProgramSource::default();
    let tokens = match tokenize(text) {
        Ok(t) => t,
        Err(e) => {
            out.errors.push(e.into());
            return out;
        }
    };
    let mut p = Parser::new(&tokens, table, supply);
    while !p.at_eof() {
        p.clear_clause_scope();
        let line = tokens.get(p_pos(&p)).map(|t| t.line).unwrap_or(1);
        match p.parse_clause_term() {
            Ok(term) => {
                let kind = classify(&term);
                let origin = match origin_file {
                    Some(f) => Origin::File {
                        file: f.to_string(),
                        line,
                    },
                    None => Origin::Repl { line },
                };
                out.clauses.push(SourceClause { term, origin, kind });
            }
            Err(e) => {
                out.errors.push(e.into());
                p.recover();
            }
        }
    }
    out
}

// Parser position is private; track the next token through a small probe.
fn p_pos(p: &Parser<'_>) -> usize {
    p.position()
}

pub fn parse_program(text: &str) -> ProgramSource {
    let mut supply = VarSupply::new();
    parse_program_with(text, None, &OperatorTable::default(), &mut supply)
}

/// Parses a first-order formula in the functional syntax
/// (`forall(X, implies(p(X), q(X)))` and friends).
pub fn parse_formula(text: &str) -> Result<crate::fol::Formula, ReadError> {
    let term = parse_term(text)?;
    crate::fol::Formula::from_term(&term).map_err(|msg| {
        ReadError::Parse(ParseError {
            msg,
            line: 1,
            column: 1,
        })
    })
}

pub fn write_term_default(t: &Term) -> String {
    write_term(t, &OperatorTable::default(), WriteOpts::default())
}

/// Writes a clause term in programme syntax, with the trailing `.`.
pub fn write_clause(t: &Term) -> String {
    format!("{}.", write_term_default(t))
}
