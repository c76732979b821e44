//! Term writer: the inverse of the parser, with operator and list sugar.

use super::parser::{OpType, OperatorTable};
use crate::term::{Term, CONS, NIL};

#[derive(Clone, Copy, Debug)]
pub struct WriteOpts {
    pub quoted: bool,
    pub number_vars: bool,
}

impl Default for WriteOpts {
    fn default() -> Self {
        WriteOpts {
            quoted: false,
            number_vars: false,
        }
    }
}

fn is_symbol_char(c: char) -> bool {
    "+-*/\\^<>=~:.?@#&$".contains(c)
}

fn is_plain_atom(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_lowercase() => chars.all(|c| c == '_' || c.is_alphanumeric()),
        Some(_) => {
            matches!(name, "!" | ";" | "[]" | "{}") || name.chars().all(is_symbol_char)
        }
        None => false,
    }
}

fn atom_text(name: &str, opts: WriteOpts) -> String {
    if !opts.quoted || is_plain_atom(name) {
        name.to_string()
    } else {
        let escaped = name.replace('\\', "\\\\").replace('\'', "''");
        format!("'{escaped}'")
    }
}

fn numbered_var_name(n: i64) -> String {
    let letter = (b'A' + (n.rem_euclid(26)) as u8) as char;
    let suffix = n.div_euclid(26);
    if suffix == 0 {
        letter.to_string()
    } else {
        format!("{letter}{suffix}")
    }
}

pub fn write_term(t: &Term, table: &OperatorTable, opts: WriteOpts) -> String {
    let mut out = String::new();
    go(t, table, opts, 1200, &mut out);
    out
}

fn term_priority(t: &Term, table: &OperatorTable) -> u32 {
    match t {
        Term::Compound(f, args) if args.len() == 2 => {
            table.infix(f).map(|d| d.priority).unwrap_or(0)
        }
        Term::Compound(f, args) if args.len() == 1 => {
            table.prefix(f).map(|d| d.priority).unwrap_or(0)
        }
        _ => 0,
    }
}

fn op_spacing(name: &str) -> (String, bool) {
    // (rendered operator, surrounded by spaces)
    if name.chars().next().map(|c| c.is_alphabetic()).unwrap_or(false) {
        (name.to_string(), true)
    } else if matches!(name, ":-" | "-->" | "=>") {
        (name.to_string(), true)
    } else {
        (name.to_string(), false)
    }
}

fn go(t: &Term, table: &OperatorTable, opts: WriteOpts, max_prec: u32, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Int(n) => out.push_str(&n.to_string()),
        Term::Atom(a) => out.push_str(&atom_text(a, opts)),
        Term::Compound(f, args) => {
            if f == CONS && args.len() == 2 {
                write_list(t, table, opts, out);
                return;
            }
            if f == "{}" && args.len() == 1 {
                out.push('{');
                go(&args[0], table, opts, 1200, out);
                out.push('}');
                return;
            }
            if opts.number_vars && f == "$VAR" && args.len() == 1 {
                if let Term::Int(n) = &args[0] {
                    out.push_str(&numbered_var_name(*n));
                    return;
                }
            }
            if args.len() == 2 {
                if let Some(def) = table.infix(f) {
                    let prec = def.priority;
                    let (lmax, rmax) = match def.op_type {
                        OpType::Xfx => (prec - 1, prec - 1),
                        OpType::Xfy => (prec - 1, prec),
                        OpType::Yfx => (prec, prec - 1),
                        _ => (prec - 1, prec - 1),
                    };
                    let needs_parens = prec > max_prec;
                    if needs_parens {
                        out.push('(');
                    }
                    let mut left = String::new();
                    go(&args[0], table, opts, lmax, &mut left);
                    let mut right = String::new();
                    go(&args[1], table, opts, rmax, &mut right);
                    out.push_str(&left);
                    if f == "," {
                        out.push_str(", ");
                    } else {
                        let (op, spaced) = op_spacing(f);
                        if spaced {
                            out.push(' ');
                            out.push_str(&op);
                            out.push(' ');
                        } else {
                            if left
                                .chars()
                                .last()
                                .map(is_symbol_char)
                                .unwrap_or(false)
                                && op.chars().next().map(is_symbol_char).unwrap_or(false)
                            {
                                out.push(' ');
                            }
                            out.push_str(&op);
                            if op.chars().last().map(is_symbol_char).unwrap_or(false)
                                && right.chars().next().map(is_symbol_char).unwrap_or(false)
                            {
                                out.push(' ');
                            }
                        }
                    }
                    out.push_str(&right);
                    if needs_parens {
                        out.push(')');
                    }
                    return;
                }
            }
            if args.len() == 1 {
                // keep  -(5)  distinct from the literal  -5
                let minus_int = f == "-" && matches!(args[0], Term::Int(_));
                if let Some(def) = table.prefix(f) {
                    if minus_int {
                        out.push_str("-(");
                        go(&args[0], table, opts, 999, out);
                        out.push(')');
                        return;
                    }
                    let prec = def.priority;
                    let amax = match def.op_type {
                        OpType::Fy => prec,
                        _ => prec - 1,
                    };
                    let needs_parens = prec > max_prec;
                    if needs_parens {
                        out.push('(');
                    }
                    let (op, spaced) = op_spacing(f);
                    out.push_str(&op);
                    let mut arg = String::new();
                    go(&args[0], table, opts, amax, &mut arg);
                    if spaced
                        || (op.chars().last().map(is_symbol_char).unwrap_or(false)
                            && arg.chars().next().map(is_symbol_char).unwrap_or(false))
                        || arg.starts_with('-')
                    {
                        out.push(' ');
                    }
                    out.push_str(&arg);
                    if needs_parens {
                        out.push(')');
                    }
                    return;
                }
            }
            out.push_str(&atom_text(f, opts));
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                go(a, table, opts, 999, out);
            }
            out.push(')');
        }
    }
}

fn write_list(t: &Term, table: &OperatorTable, opts: WriteOpts, out: &mut String) {
    out.push('[');
    let mut first = true;
    let mut cur = t;
    loop {
        match cur {
            Term::Compound(f, args) if f == CONS && args.len() == 2 => {
                if !first {
                    out.push(',');
                }
                go(&args[0], table, opts, 999, out);
                first = false;
                cur = &args[1];
            }
            Term::Atom(a) if a == NIL => break,
            other => {
                out.push('|');
                go(other, table, opts, 999, out);
                break;
            }
        }
    }
    out.push(']');
}

// The priority entry point: parenthesizes a whole term that itself is an
// operator application of priority above the context.
pub fn write_term_prec(t: &Term, table: &OperatorTable, opts: WriteOpts, max_prec: u32) -> String {
    let mut out = String::new();
    if term_priority(t, table) > max_prec {
        out.push('(');
        go(t, table, opts, 1200, &mut out);
        out.push(')');
    } else {
        go(t, table, opts, max_prec, &mut out);
    }
    out
}
