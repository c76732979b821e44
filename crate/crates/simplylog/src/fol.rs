//! First-order formulas: transformation to clausal form, Predicate
//! Completion, and the Closed World Assumption.

use crate::clausal::{
    herbrand_base, least_herbrand_model, ClausalError, GeneralClause, Program, Signature,
};
use crate::term::{Subst, Term, VarSupply};
use std::collections::BTreeSet;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    Atom(Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Equals(Term, Term),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn forall(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }
    pub fn exists(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn conjoin_all(fs: Vec<Formula>) -> Option<Formula> {
        let mut it = fs.into_iter();
        let first = it.next()?;
        Some(it.fold(first, Formula::and))
    }

    pub fn disjoin_all(fs: Vec<Formula>) -> Option<Formula> {
        let mut it = fs.into_iter();
        let first = it.next()?;
        Some(it.fold(first, Formula::or))
    }

    /// Reads a formula from the functional term syntax.
    pub fn from_term(t: &Term) -> Result<Formula, String> {
        match t {
            Term::Compound(f, args) => match (f.as_str(), args.len()) {
                ("not", 1) => Ok(Formula::not(Formula::from_term(&args[0])?)),
                ("and", 2) => Ok(Formula::and(
                    Formula::from_term(&args[0])?,
                    Formula::from_term(&args[1])?,
                )),
                ("or", 2) => Ok(Formula::or(
                    Formula::from_term(&args[0])?,
                    Formula::from_term(&args[1])?,
                )),
                ("implies", 2) => Ok(Formula::implies(
                    Formula::from_term(&args[0])?,
                    Formula::from_term(&args[1])?,
                )),
                ("iff", 2) => Ok(Formula::iff(
                    Formula::from_term(&args[0])?,
                    Formula::from_term(&args[1])?,
                )),
                ("forall", 2) | ("exists", 2) => {
                    let v = match &args[0] {
                        Term::Var(v) => v.clone(),
                        other => return Err(format!("quantifier binds a variable, found {other}")),
                    };
                    let body = Formula::from_term(&args[1])?;
                    Ok(if f == "forall" {
                        Formula::forall(v, body)
                    } else {
                        Formula::exists(v, body)
                    })
                }
                ("equals", 2) | ("=", 2) => Ok(Formula::Equals(args[0].clone(), args[1].clone())),
                _ => Ok(Formula::Atom(t.clone())),
            },
            Term::Atom(_) => Ok(Formula::Atom(t.clone())),
            _ => Err(format!("not a formula: {t}")),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Formula::Atom(a) => a.clone(),
            Formula::Not(f) => Term::comp("not", vec![f.to_term()]),
            Formula::And(a, b) => Term::comp("and", vec![a.to_term(), b.to_term()]),
            Formula::Or(a, b) => Term::comp("or", vec![a.to_term(), b.to_term()]),
            Formula::Implies(a, b) => Term::comp("implies", vec![a.to_term(), b.to_term()]),
            Formula::Iff(a, b) => Term::comp("iff", vec![a.to_term(), b.to_term()]),
            Formula::Forall(v, f) => {
                Term::comp("forall", vec![Term::Var(v.clone()), f.to_term()])
            }
            Formula::Exists(v, f) => {
                Term::comp("exists", vec![Term::Var(v.clone()), f.to_term()])
            }
            Formula::Equals(a, b) => Term::comp("equals", vec![a.clone(), b.clone()]),
        }
    }

    /// Free variables, in first-occurrence order.
    pub fn free_variables(&self) -> Vec<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match f {
                Formula::Atom(t) => {
                    for v in t.variables() {
                        if !bound.contains(&v) && !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
                Formula::Equals(a, b) => {
                    for t in [a, b] {
                        for v in t.variables() {
                            if !bound.contains(&v) && !out.contains(&v) {
                                out.push(v);
                            }
                        }
                    }
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(v, g) | Formula::Exists(v, g) => {
                    bound.push(v.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn substitute(&self, s: &Subst) -> Formula {
        match self {
            Formula::Atom(t) => Formula::Atom(s.apply(t)),
            Formula::Equals(a, b) => Formula::Equals(s.apply(a), s.apply(b)),
            Formula::Not(f) => Formula::not(f.substitute(s)),
            Formula::And(a, b) => Formula::and(a.substitute(s), b.substitute(s)),
            Formula::Or(a, b) => Formula::or(a.substitute(s), b.substitute(s)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(s), b.substitute(s)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(s), b.substitute(s)),
            // substitution below a quantifier never captures here: callers
            // standardize apart first
            Formula::Forall(v, f) => Formula::Forall(v.clone(), Box::new(f.substitute(s))),
            Formula::Exists(v, f) => Formula::Exists(v.clone(), Box::new(f.substitute(s))),
        }
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", crate::reader::write_term_default(&self.to_term()))
    }
}

/// Source of Skolem symbols `sk1`, `sk2`, ...; the `sk` prefix is reserved.
#[derive(Clone, Debug, Default)]
pub struct SkolemSupply {
    counter: u32,
}

impl SkolemSupply {
    pub fn new() -> SkolemSupply {
        SkolemSupply::default()
    }

    pub fn fresh(&mut self) -> String {
        self.counter += 1;
        format!("sk{}", self.counter)
    }
}

/// Step 1: rewrite Iff and Implies into And/Or/Not; Equals becomes an
/// ordinary `=` atom.
pub fn eliminate_implications(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Equals(a, b) => Formula::Atom(Term::comp("=", vec![a.clone(), b.clone()])),
        Formula::Not(g) => Formula::not(eliminate_implications(g)),
        Formula::And(a, b) => Formula::and(eliminate_implications(a), eliminate_implications(b)),
        Formula::Or(a, b) => Formula::or(eliminate_implications(a), eliminate_implications(b)),
        Formula::Implies(a, b) => Formula::or(
            Formula::not(eliminate_implications(a)),
            eliminate_implications(b),
        ),
        Formula::Iff(a, b) => {
            let a1 = eliminate_implications(a);
            let b1 = eliminate_implications(b);
            Formula::and(
                Formula::or(Formula::not(a1.clone()), b1.clone()),
                Formula::or(Formula::not(b1), a1),
            )
        }
        Formula::Forall(v, g) => Formula::forall(v.clone(), eliminate_implications(g)),
        Formula::Exists(v, g) => Formula::exists(v.clone(), eliminate_implications(g)),
    }
}

/// Step 2: negation normal form; afterwards no Not wraps a non-atom.
pub fn to_nnf(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => match g.as_ref() {
            Formula::Not(h) => to_nnf(h),
            Formula::And(a, b) => Formula::or(
                to_nnf(&Formula::not((**a).clone())),
                to_nnf(&Formula::not((**b).clone())),
            ),
            Formula::Or(a, b) => Formula::and(
                to_nnf(&Formula::not((**a).clone())),
                to_nnf(&Formula::not((**b).clone())),
            ),
            Formula::Forall(v, h) => {
                Formula::exists(v.clone(), to_nnf(&Formula::not((**h).clone())))
            }
            Formula::Exists(v, h) => {
                Formula::forall(v.clone(), to_nnf(&Formula::not((**h).clone())))
            }
            Formula::Atom(_) => f.clone(),
            other => Formula::not(to_nnf(other)),
        },
        Formula::And(a, b) => Formula::and(to_nnf(a), to_nnf(b)),
        Formula::Or(a, b) => Formula::or(to_nnf(a), to_nnf(b)),
        Formula::Forall(v, g) => Formula::forall(v.clone(), to_nnf(g)),
        Formula::Exists(v, g) => Formula::exists(v.clone(), to_nnf(g)),
        _ => f.clone(),
    }
}

/// Step 3: give every quantifier its own variable.
fn standardize_apart(f: &Formula, supply: &mut VarSupply) -> Formula {
    fn go(f: &Formula, renaming: &Subst, supply: &mut VarSupply) -> Formula {
        match f {
            Formula::Atom(t) => Formula::Atom(renaming.apply(t)),
            Formula::Not(g) => Formula::not(go(g, renaming, supply)),
            Formula::And(a, b) => Formula::and(go(a, renaming, supply), go(b, renaming, supply)),
            Formula::Or(a, b) => Formula::or(go(a, renaming, supply), go(b, renaming, supply)),
            Formula::Forall(v, g) | Formula::Exists(v, g) => {
                let fresh = supply.fresh();
                let mut r = renaming.clone();
                r.bind(v.clone(), Term::Var(fresh.clone()));
                let body = go(g, &r, supply);
                match f {
                    Formula::Forall(..) => Formula::forall(fresh, body),
                    _ => Formula::exists(fresh, body),
                }
            }
            other => other.clone(),
        }
    }
    go(f, &Subst::new(), supply)
}

/// Steps 4 and 5: Skolemize existentials (enclosing universals become the
/// Skolem arguments), then drop universal quantifiers.
fn skolemize(f: &Formula, universals: &mut Vec<String>, supply: &mut SkolemSupply) -> Formula {
    match f {
        Formula::Exists(v, g) => {
            let sk = supply.fresh();
            let args: Vec<Term> = universals.iter().map(|u| Term::Var(u.clone())).collect();
            let replacement = Term::comp(sk, args);
            let g = g.substitute(&Subst::singleton(v.clone(), replacement));
            skolemize(&g, universals, supply)
        }
        Formula::Forall(v, g) => {
            universals.push(v.clone());
            let out = skolemize(g, universals, supply);
            universals.pop();
            out
        }
        Formula::And(a, b) => Formula::and(
            skolemize(a, universals, supply),
            skolemize(b, universals, supply),
        ),
        Formula::Or(a, b) => Formula::or(
            skolemize(a, universals, supply),
            skolemize(b, universals, supply),
        ),
        other => other.clone(),
    }
}

/// Steps 6 and 7: distribute Or over And and split into clauses.
fn to_clauses(f: &Formula, out: &mut Vec<GeneralClause>) {
    match f {
        Formula::And(a, b) => {
            to_clauses(a, out);
            to_clauses(b, out);
        }
        other => {
            let mut head = Vec::new();
            let mut body = Vec::new();
            collect_disjunction(other, &mut head, &mut body);
            out.push(GeneralClause::new(head, body));
        }
    }
}

fn collect_disjunction(f: &Formula, head: &mut Vec<Term>, body: &mut Vec<Term>) {
    match f {
        Formula::Or(a, b) => {
            // distribution has already pulled And above Or
            collect_disjunction(a, head, body);
            collect_disjunction(b, head, body);
        }
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(t) => body.push(t.clone()),
            _ => panic!("not in NNF"),
        },
        Formula::Atom(t) => head.push(t.clone()),
        other => panic!("unexpected formula in clause split: {other}"),
    }
}

/// Pulls And above Or everywhere (CNF on a quantifier-free NNF matrix).
fn distribute_or(f: &Formula) -> Formula {
    match f {
        Formula::And(a, b) => Formula::and(distribute_or(a), distribute_or(b)),
        Formula::Or(a, b) => {
            let a = distribute_or(a);
            let b = distribute_or(b);
            match (a, b) {
                (Formula::And(x, y), b) => distribute_or(&Formula::and(
                    Formula::or(*x, b.clone()),
                    Formula::or(*y, b),
                )),
                (a, Formula::And(x, y)) => distribute_or(&Formula::and(
                    Formula::or(a.clone(), *x),
                    Formula::or(a, *y),
                )),
                (a, b) => Formula::or(a, b),
            }
        }
        other => other.clone(),
    }
}

/// The whole pipeline: eliminate implications, NNF, standardize apart,
/// Skolemize, drop universals, distribute, split. The result is
/// equisatisfiable with the input (free variables are universally closed
/// first).
pub fn to_clausal_form(f: &Formula, supply: &mut SkolemSupply) -> Vec<GeneralClause> {
    let mut closed = f.clone();
    for v in f.free_variables().into_iter().rev() {
        closed = Formula::forall(v, closed);
    }
    let step1 = eliminate_implications(&closed);
    let step2 = to_nnf(&step1);
    let mut vars = VarSupply::new();
    let step3 = standardize_apart(&step2, &mut vars);
    let step5 = skolemize(&step3, &mut Vec::new(), supply);
    let step6 = distribute_or(&step5);
    let mut out = Vec::new();
    to_clauses(&step6, &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct Completion {
    pub definitions: Vec<Formula>,
    pub equality_theory: Vec<Formula>,
}

/// Clark's Predicate Completion of a definite program: each predicate's
/// if-clauses strengthened to an iff-definition; predicates without
/// clauses complete to a universal negation. The Clark equality theory is
/// returned separately.
pub fn predicate_completion(p: &Program) -> Result<Completion, ClausalError> {
    for c in p.clauses() {
        if !c.is_definite() {
            return Err(ClausalError::NotDefinite(c.to_string(), c.head.len()));
        }
    }
    // Collect the predicates to complete, looking through negated body
    // literals: `\+` is part of the completion semantics, not a predicate.
    let mut completed: Vec<(String, usize)> = Vec::new();
    for c in p.clauses() {
        for a in c.head.iter().chain(&c.body) {
            if let Some((f, n)) = strip_naf(a).functor() {
                let key = (f.to_string(), n);
                if !completed.contains(&key) {
                    completed.push(key);
                }
            }
        }
    }
    let mut definitions = Vec::new();
    for (pred, arity) in completed {
        let params: Vec<String> = (0..arity).map(|i| format!("_X{i}")).collect();
        let head_atom = Term::comp(
            pred.clone(),
            params.iter().map(|v| Term::var(v.clone())).collect(),
        );
        let mut disjuncts: Vec<Formula> = Vec::new();
        for c in p.clauses() {
            let h = &c.head[0];
            let matches = match h.functor() {
                Some((f, n)) => f == pred && n == arity,
                None => false,
            };
            if !matches {
                continue;
            }
            disjuncts.push(clause_disjunct(c, &params));
        }
        let lhs = Formula::Atom(head_atom);
        let def = match Formula::disjoin_all(disjuncts) {
            Some(rhs) => Formula::iff(lhs, rhs),
            None => Formula::not(lhs),
        };
        let closed = params
            .into_iter()
            .rev()
            .fold(def, |acc, v| Formula::forall(v, acc));
        definitions.push(closed);
    }
    Ok(Completion {
        equality_theory: clark_equality_theory(p),
        definitions,
    })
}

// Looks through any number of `\+` wrappers to the literal underneath.
fn strip_naf(t: &Term) -> &Term {
    match t {
        Term::Compound(f, args) if f == "\\+" && args.len() == 1 => strip_naf(&args[0]),
        _ => t,
    }
}

// A body literal as a formula: negation-as-failure literals become
// classical negation under the completion.
fn body_formula(t: &Term) -> Formula {
    match t {
        Term::Compound(f, args) if f == "\\+" && args.len() == 1 => {
            Formula::not(body_formula(&args[0]))
        }
        _ => Formula::Atom(t.clone()),
    }
}

// One disjunct of a completed definition: ∃ȳ (x̄ = t̄ ∧ B). When the head
// arguments are distinct variables the equalities are solved by
// substitution instead.
fn clause_disjunct(c: &GeneralClause, params: &[String]) -> Formula {
    let head_args: Vec<Term> = match &c.head[0] {
        Term::Compound(_, args) => args.clone(),
        _ => vec![],
    };
    let distinct_vars = {
        let mut names = Vec::new();
        head_args.iter().all(|a| match a {
            Term::Var(v) if !names.contains(v) => {
                names.push(v.clone());
                true
            }
            _ => false,
        })
    };
    if distinct_vars {
        let mut s = Subst::new();
        for (a, pv) in head_args.iter().zip(params) {
            if let Term::Var(v) = a {
                s.bind(v.clone(), Term::var(pv.clone()));
            }
        }
        let body: Vec<Formula> = c.body.iter().map(|b| body_formula(&s.apply(b))).collect();
        let inner = Formula::conjoin_all(body).unwrap_or(Formula::Atom(Term::atom("true")));
        // remaining clause variables are body-local: existentially close
        let mut free: Vec<String> = inner.free_variables();
        free.retain(|v| !params.contains(v));
        free.into_iter()
            .rev()
            .fold(inner, |acc, v| Formula::exists(v, acc))
    } else {
        let mut parts: Vec<Formula> = params
            .iter()
            .zip(&head_args)
            .map(|(p, t)| Formula::Equals(Term::var(p.clone()), t.clone()))
            .collect();
        parts.extend(c.body.iter().map(body_formula));
        let inner = Formula::conjoin_all(parts).unwrap_or(Formula::Atom(Term::atom("true")));
        c.variables()
            .into_iter()
            .rev()
            .fold(inner, |acc, v| Formula::exists(v, acc))
    }
}

// Reflexivity, symmetry, transitivity, plus the ground disequalities and
// functor axioms the program's signature calls for. Emitted for
// completeness of the textbook object; the desk-scale model checker works
// over Herbrand interpretations where equality is identity.
fn clark_equality_theory(p: &Program) -> Vec<Formula> {
    let mut out = vec![
        Formula::forall("X", Formula::Equals(Term::var("X"), Term::var("X"))),
        Formula::forall(
            "X",
            Formula::forall(
                "Y",
                Formula::implies(
                    Formula::Equals(Term::var("X"), Term::var("Y")),
                    Formula::Equals(Term::var("Y"), Term::var("X")),
                ),
            ),
        ),
        Formula::forall(
            "X",
            Formula::forall(
                "Y",
                Formula::forall(
                    "Z",
                    Formula::implies(
                        Formula::and(
                            Formula::Equals(Term::var("X"), Term::var("Y")),
                            Formula::Equals(Term::var("Y"), Term::var("Z")),
                        ),
                        Formula::Equals(Term::var("X"), Term::var("Z")),
                    ),
                ),
            ),
        ),
    ];
    let sig = Signature::of_clauses(p.clauses().iter());
    let consts: Vec<&Term> = sig.constants.iter().collect();
    for i in 0..consts.len() {
        for j in (i + 1)..consts.len() {
            out.push(Formula::not(Formula::Equals(
                consts[i].clone(),
                consts[j].clone(),
            )));
        }
    }
    out
}

/// ¬A for every ground atom A of the depth-bounded base not in the least
/// Herbrand model.
pub fn cwa_consequences(p: &Program, depth: u32) -> Result<Vec<Formula>, ClausalError> {
    Ok(cwa_false_atoms(p, depth)?
        .into_iter()
        .map(|a| Formula::not(Formula::Atom(a)))
        .collect())
}

pub fn cwa_false_atoms(p: &Program, depth: u32) -> Result<BTreeSet<Term>, ClausalError> {
    let lm = least_herbrand_model(p, depth, 10_000)?;
    let base = herbrand_base(p, depth);
    Ok(base
        .into_iter()
        .filter(|a| !lm.model.satisfies(a))
        .collect())
}
