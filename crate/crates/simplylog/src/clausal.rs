//! General clauses, Herbrand semantics, resolution refutation, least-model
//! computation by forward chaining, and the naive full-clausal interpreter.

use crate::term::{rename_terms, unify, Subst, Term, VarSupply};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap, HashSet};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A signed atom; the atom root is always a predicate symbol.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub positive: bool,
    pub atom: Term,
}

/// `A1;...;An :- B1,...,Bm`: disjunctive head, conjunctive body. Literal
/// order is kept for display, duplicates are merged.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GeneralClause {
    pub head: Vec<Term>,
    pub body: Vec<Term>,
}

impl GeneralClause {
    pub fn new(mut head: Vec<Term>, mut body: Vec<Term>) -> GeneralClause {
        dedup_preserving(&mut head);
        dedup_preserving(&mut body);
        GeneralClause { head, body }
    }

    pub fn fact(atom: Term) -> GeneralClause {
        GeneralClause::new(vec![atom], vec![])
    }

    pub fn denial(body: Vec<Term>) -> GeneralClause {
        GeneralClause::new(vec![], body)
    }

    pub fn rule(head: Term, body: Vec<Term>) -> GeneralClause {
        GeneralClause::new(vec![head], body)
    }

    pub fn is_definite(&self) -> bool {
        self.head.len() == 1
    }

    pub fn is_denial(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_empty() && self.body.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.head.iter().chain(&self.body).all(Term::is_ground)
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in self.head.iter().chain(&self.body) {
            for v in t.variables() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn apply(&self, s: &Subst) -> GeneralClause {
        GeneralClause::new(
            self.head.iter().map(|t| s.apply(t)).collect(),
            self.body.iter().map(|t| s.apply(t)).collect(),
        )
    }

    /// A variant sharing no variables with anything `supply` issued before.
    pub fn rename_apart(&self, supply: &mut VarSupply) -> GeneralClause {
        let mut all: Vec<Term> = self.head.clone();
        all.extend(self.body.iter().cloned());
        let renamed = rename_terms(&all, supply);
        let (h, b) = renamed.split_at(self.head.len());
        GeneralClause {
            head: h.to_vec(),
            body: b.to_vec(),
        }
    }

    /// Canonical key: variables numbered in first-occurrence order over
    /// sorted literals, for duplicate elimination during saturation.
    pub fn canonical_key(&self) -> String {
        let mut head: Vec<Term> = self.head.clone();
        let mut body: Vec<Term> = self.body.clone();
        head.sort();
        body.sort();
        let mut map: HashMap<String, String> = HashMap::new();
        let mut n = 0;
        let mut canon = |t: &Term| -> Term {
            fn go(t: &Term, map: &mut HashMap<String, String>, n: &mut usize) -> Term {
                match t {
                    Term::Var(v) => {
                        let name = map.entry(v.clone()).or_insert_with(|| {
                            let s = format!("_C{n}");
                            *n += 1;
                            s
                        });
                        Term::Var(name.clone())
                    }
                    Term::Atom(_) | Term::Int(_) => t.clone(),
                    Term::Compound(f, args) => Term::Compound(
                        f.clone(),
                        args.iter().map(|a| go(a, map, n)).collect(),
                    ),
                }
            }
            go(t, &mut map, &mut n)
        };
        let head: Vec<String> = head.iter().map(|t| format!("{:?}", canon(t))).collect();
        let body: Vec<String> = body.iter().map(|t| format!("{:?}", canon(t))).collect();
        format!("{} :- {}", head.join(";"), body.join(","))
    }

    /// Parses a clause from its term form: `H`, `H :- B`, `H1;H2 :- B`,
    /// or a denial `:- B`.
    pub fn from_term(t: &Term) -> Result<GeneralClause, String> {
        match t {
            Term::Compound(f, args) if f == ":-" && args.len() == 2 => Ok(GeneralClause::new(
                disjuncts(&args[0])?,
                conjuncts(&args[1])?,
            )),
            Term::Compound(f, args) if f == ":-" && args.len() == 1 => {
                Ok(GeneralClause::denial(conjuncts(&args[0])?))
            }
            _ => Ok(GeneralClause::new(disjuncts(t)?, vec![])),
        }
    }

    pub fn to_term(&self) -> Term {
        let head = fold_op(";", &self.head);
        let body = fold_op(",", &self.body);
        match (head, body) {
            (Some(h), Some(b)) => Term::comp(":-", vec![h, b]),
            (Some(h), None) => h,
            (None, Some(b)) => Term::comp(":-", vec![b]),
            (None, None) => Term::atom("false"),
        }
    }
}

impl std::fmt::Display for GeneralClause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return write!(f, "[]");
        }
        write!(f, "{}", crate::reader::write_term_default(&self.to_term()))
    }
}

fn dedup_preserving(v: &mut Vec<Term>) {
    let mut seen = HashSet::new();
    v.retain(|t| seen.insert(t.clone()));
}

fn fold_op(op: &str, items: &[Term]) -> Option<Term> {
    let mut it = items.iter().rev();
    let last = it.next()?.clone();
    Some(it.fold(last, |acc, t| Term::comp(op, vec![t.clone(), acc])))
}

pub fn conjuncts(t: &Term) -> Result<Vec<Term>, String> {
    flatten_chain(t, ",")
}

fn disjuncts(t: &Term) -> Result<Vec<Term>, String> {
    flatten_chain(t, ";")
}

fn flatten_chain(t: &Term, op: &str) -> Result<Vec<Term>, String> {
    match t {
        Term::Compound(f, args) if f == op && args.len() == 2 => {
            let mut out = flatten_chain(&args[0], op)?;
            out.extend(flatten_chain(&args[1], op)?);
            Ok(out)
        }
        Term::Atom(a) if a == "true" && op == "," => Ok(vec![]),
        Term::Var(_) | Term::Int(_) => Err(format!("expected an atom, found {t}")),
        _ => Ok(vec![t.clone()]),
    }
}

/// An ordered clause collection with a head-predicate index.
#[derive(Clone, Debug, Default)]
pub struct Program {
    clauses: Vec<GeneralClause>,
    index: HashMap<(String, usize), Vec<usize>>,
}

impl Program {
    pub fn new() -> Program {
        Program::default()
    }

    pub fn from_clauses(clauses: Vec<GeneralClause>) -> Program {
        let mut p = Program::new();
        for c in clauses {
            p.push(c);
        }
        p
    }

    pub fn push(&mut self, c: GeneralClause) {
        let pos = self.clauses.len();
        if let Some(h) = c.head.first() {
            if let Some((f, n)) = h.functor() {
                self.index.entry((f.to_string(), n)).or_default().push(pos);
            }
        }
        self.clauses.push(c);
    }

    pub fn clauses(&self) -> &[GeneralClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_definite(&self) -> bool {
        self.clauses.iter().all(GeneralClause::is_definite)
    }

    /// Positions of clauses whose head predicate matches.
    pub fn matching(&self, functor: &str, arity: usize) -> &[usize] {
        self.index
            .get(&(functor.to_string(), arity))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn defines(&self, functor: &str, arity: usize) -> bool {
        self.index.contains_key(&(functor.to_string(), arity))
    }

    /// All predicate symbols with their arities, in first-appearance order.
    pub fn predicates(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for c in &self.clauses {
            for a in c.head.iter().chain(&c.body) {
                if let Some((f, n)) = a.functor() {
                    let key = (f.to_string(), n);
                    if !out.contains(&key) {
                        out.push(key);
                    }
                }
            }
        }
        out
    }
}

/// Function symbols (constants and functors) of a clause set, predicates
/// excluded.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub constants: BTreeSet<Term>,
    pub functors: BTreeSet<(String, usize)>,
}

impl Signature {
    pub fn of_clauses<'a>(clauses: impl Iterator<Item = &'a GeneralClause>) -> Signature {
        let mut sig = Signature::default();
        for c in clauses {
            for atom in c.head.iter().chain(&c.body) {
                if let Term::Compound(_, args) = atom {
                    for a in args {
                        sig.collect(a);
                    }
                }
            }
        }
        sig
    }

    fn collect(&mut self, t: &Term) {
        match t {
            Term::Atom(_) | Term::Int(_) => {
                self.constants.insert(t.clone());
            }
            Term::Compound(f, args) => {
                self.functors.insert((f.clone(), args.len()));
                for a in args {
                    self.collect(a);
                }
            }
            Term::Var(_) => {}
        }
    }
}

/// All ground terms over the program's symbols up to the given functor
/// nesting depth. Programs without constants get the reserved constant
/// `c0` injected.
pub fn herbrand_universe(p: &Program, depth: u32) -> BTreeSet<Term> {
    let sig = Signature::of_clauses(p.clauses.iter());
    herbrand_universe_sig(&sig, depth)
}

pub fn herbrand_universe_sig(sig: &Signature, depth: u32) -> BTreeSet<Term> {
    let mut universe: BTreeSet<Term> = sig.constants.clone();
    if universe.is_empty() {
        universe.insert(Term::atom("c0"));
    }
    for _ in 0..depth {
        let snapshot: Vec<Term> = universe.iter().cloned().collect();
        for (f, n) in &sig.functors {
            for combo in tuples(&snapshot, *n) {
                universe.insert(Term::Compound(f.clone(), combo));
            }
        }
    }
    universe
}

/// All ground atoms: every predicate applied to universe tuples.
pub fn herbrand_base(p: &Program, depth: u32) -> BTreeSet<Term> {
    let universe: Vec<Term> = herbrand_universe(p, depth).into_iter().collect();
    let mut base = BTreeSet::new();
    for (pred, arity) in p.predicates() {
        if arity == 0 {
            base.insert(Term::Atom(pred));
        } else {
            for combo in tuples(&universe, arity) {
                base.insert(Term::Compound(pred.clone(), combo));
            }
        }
    }
    base
}

/// All tuples of length `n` over `items`.
pub fn tuples(items: &[Term], n: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * items.len());
        for prefix in &out {
            for item in items {
                let mut t = prefix.clone();
                t.push(item.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// All ground substitutions for `vars` over `universe`.
pub fn ground_substitutions(vars: &[String], universe: &[Term]) -> Vec<Subst> {
    tuples(universe, vars.len())
        .into_iter()
        .map(|combo| {
            let mut s = Subst::new();
            for (v, t) in vars.iter().zip(combo) {
                s.bind(v.clone(), t);
            }
            s
        })
        .collect()
}

/// A finite set of ground atoms taken to be true.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct HerbrandInterpretation {
    pub true_atoms: BTreeSet<Term>,
}

impl HerbrandInterpretation {
    pub fn new(atoms: impl IntoIterator<Item = Term>) -> HerbrandInterpretation {
        HerbrandInterpretation {
            true_atoms: atoms.into_iter().collect(),
        }
    }

    pub fn satisfies(&self, atom: &Term) -> bool {
        self.true_atoms.contains(atom)
    }
}

fn instance_satisfied(i: &HerbrandInterpretation, c: &GeneralClause) -> bool {
    let body_true = c.body.iter().all(|b| i.satisfies(b));
    !body_true || c.head.iter().any(|h| i.satisfies(h))
}

/// Does `i` satisfy every ground instance of every clause of `p` over the
/// depth-bounded universe?
pub fn is_model(i: &HerbrandInterpretation, p: &Program, depth: u32) -> bool {
    #[cfg(feature = "parallel")]
    {
        let universe: Vec<Term> = herbrand_universe(p, depth).into_iter().collect();
        p.clauses.par_iter().all(|c| {
            ground_substitutions(&c.variables(), &universe)
                .par_iter()
                .all(|s| instance_satisfied(i, &c.apply(s)))
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        is_model_sequential(i, p, depth)
    }
}

pub fn is_model_sequential(i: &HerbrandInterpretation, p: &Program, depth: u32) -> bool {
    let universe: Vec<Term> = herbrand_universe(p, depth).into_iter().collect();
    p.clauses.iter().all(|c| {
        ground_substitutions(&c.variables(), &universe)
            .iter()
            .all(|s| instance_satisfied(i, &c.apply(s)))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeastModel {
    pub model: HerbrandInterpretation,
    /// Set when the iteration stopped on fuel rather than at the fixpoint.
    pub partial: bool,
    pub iterations: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClausalError {
    #[error("program is not definite: clause '{0}' has {1} head literals")]
    NotDefinite(String, usize),
}

fn check_definite(p: &Program) -> Result<(), ClausalError> {
    for c in &p.clauses {
        if !c.is_definite() {
            return Err(ClausalError::NotDefinite(c.to_string(), c.head.len()));
        }
    }
    Ok(())
}

/// Ground instances of all clauses over the depth-bounded universe.
/// Instances whose atoms fall outside the depth bound are dropped, keeping
/// the fixpoint inside the bounded base.
fn ground_program(p: &Program, depth: u32) -> Vec<GeneralClause> {
    let uset = herbrand_universe(p, depth);
    let universe: Vec<Term> = uset.iter().cloned().collect();
    let in_base = |atom: &Term| -> bool {
        match atom {
            Term::Compound(_, args) => args.iter().all(|a| uset.contains(a)),
            _ => true,
        }
    };
    let mut out = Vec::new();
    for c in &p.clauses {
        for s in ground_substitutions(&c.variables(), &universe) {
            let g = c.apply(&s);
            if g.head.iter().chain(&g.body).all(in_base) {
                out.push(g);
            }
        }
    }
    out
}

/// Least fixpoint of the immediate-consequence step over the depth-bounded
/// universe; monotone iteration, stops at the fixpoint or when `fuel`
/// iterations are exhausted.
pub fn least_herbrand_model(p: &Program, depth: u32, fuel: u32) -> Result<LeastModel, ClausalError> {
    check_definite(p)?;
    let ground = ground_program(p, depth);
    Ok(fixpoint(&ground, fuel, consequence_step))
}

pub fn least_herbrand_model_sequential(
    p: &Program,
    depth: u32,
    fuel: u32,
) -> Result<LeastModel, ClausalError> {
    check_definite(p)?;
    let ground = ground_program(p, depth);
    Ok(fixpoint(&ground, fuel, consequence_step_sequential))
}

fn fixpoint(
    ground: &[GeneralClause],
    fuel: u32,
    step: fn(&[GeneralClause], &BTreeSet<Term>) -> BTreeSet<Term>,
) -> LeastModel {
    let mut model: BTreeSet<Term> = BTreeSet::new();
    let mut iterations = 0;
    let mut partial = false;
    loop {
        if iterations >= fuel {
            partial = true;
            break;
        }
        iterations += 1;
        let next = step(ground, &model);
        if next == model {
            break;
        }
        model = next;
    }
    LeastModel {
        model: HerbrandInterpretation { true_atoms: model },
        partial,
        iterations,
    }
}

fn consequence_step_sequential(
    ground: &[GeneralClause],
    current: &BTreeSet<Term>,
) -> BTreeSet<Term> {
    ground
        .iter()
        .filter(|c| c.body.iter().all(|b| current.contains(b)))
        .filter_map(|c| c.head.first().cloned())
        .collect()
}

#[cfg(feature = "parallel")]
fn consequence_step(ground: &[GeneralClause], current: &BTreeSet<Term>) -> BTreeSet<Term> {
    ground
        .par_iter()
        .filter(|c| c.body.iter().all(|b| current.contains(b)))
        .filter_map(|c| c.head.first().cloned())
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[cfg(not(feature = "parallel"))]
use consequence_step_sequential as consequence_step_impl;

#[cfg(not(feature = "parallel"))]
fn consequence_step(ground: &[GeneralClause], current: &BTreeSet<Term>) -> BTreeSet<Term> {
    consequence_step_impl(ground, current)
}

/// All resolvents of two ground clauses on one complementary atom pair.
pub fn propositional_resolve(c1: &GeneralClause, c2: &GeneralClause) -> Vec<GeneralClause> {
    let mut out = Vec::new();
    for (pos_clause, neg_clause, swap) in [(c1, c2, false), (c2, c1, true)] {
        for h in &pos_clause.head {
            for b in &neg_clause.body {
                if h == b {
                    let mut head: Vec<Term> = pos_clause
                        .head
                        .iter()
                        .filter(|x| *x != h)
                        .cloned()
                        .collect();
                    head.extend(neg_clause.head.iter().cloned());
                    let mut body: Vec<Term> = pos_clause.body.clone();
                    body.extend(neg_clause.body.iter().filter(|x| *x != b).cloned());
                    let r = GeneralClause::new(head, body);
                    if !out.contains(&r) {
                        out.push(r);
                    }
                }
            }
        }
        // both orders covered by the loop above; avoid doing it twice for
        // identical clauses
        if swap && c1 == c2 {
            break;
        }
    }
    out
}

/// One step of a refutation: `resolvent` follows from the two parents by
/// resolving on `atom` under `unifier`. A factoring step has equal parents.
#[derive(Clone, Debug, Serialize)]
pub struct RefStep {
    pub parents: (usize, usize),
    pub atom: String,
    #[serde(skip)]
    pub atom_term: Term,
    #[serde(skip)]
    pub unifier: Subst,
    pub resolvent: String,
    #[serde(skip)]
    pub resolvent_clause: GeneralClause,
}

/// A resolution refutation: inputs, then derived steps, the last of which
/// yields the empty clause.
#[derive(Clone, Debug)]
pub struct Refutation {
    pub inputs: Vec<GeneralClause>,
    pub steps: Vec<RefStep>,
}

impl Refutation {
    fn clause_at(&self, idx: usize) -> &GeneralClause {
        if idx < self.inputs.len() {
            &self.inputs[idx]
        } else {
            &self.steps[idx - self.inputs.len()].resolvent_clause
        }
    }

    /// Line-oriented trace: `step k: <i> + <j> on <atom> gives <clause>`.
    pub fn render_trace(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "step {}: <{}> + <{}> on {} gives {}\n",
                k + 1,
                s.parents.0,
                s.parents.1,
                s.atom,
                s.resolvent
            ));
        }
        out
    }

    /// Structured export, one object per step.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "inputs": self.inputs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "steps": self.steps,
        })
    }

    /// Re-derives every step from its parents; true when the whole
    /// refutation is valid and ends in the empty clause.
    pub fn replay(&self) -> bool {
        let mut supply = VarSupply::new();
        for (k, step) in self.steps.iter().enumerate() {
            let p1 = self.clause_at(step.parents.0);
            let p2 = self.clause_at(step.parents.1);
            let candidates = if step.parents.0 == step.parents.1 {
                factors(p1, &mut supply)
            } else {
                resolve_clauses(p1, p2, &mut supply)
                    .into_iter()
                    .map(|(c, _, _)| c)
                    .collect()
            };
            let found = candidates
                .iter()
                .any(|c| c.canonical_key() == step.resolvent_clause.canonical_key());
            if !found {
                return false;
            }
            let is_last = k + 1 == self.steps.len();
            if is_last && !step.resolvent_clause.is_empty() {
                return false;
            }
        }
        !self.steps.is_empty()
    }
}

/// All binary resolvents of two (not necessarily ground) clauses, renamed
/// apart; returns the resolvent plus the resolved-upon atom and unifier.
pub fn resolve_clauses(
    c1: &GeneralClause,
    c2: &GeneralClause,
    supply: &mut VarSupply,
) -> Vec<(GeneralClause, Term, Subst)> {
    let a = c1.rename_apart(supply);
    let b = c2.rename_apart(supply);
    let mut out = Vec::new();
    for (pos, neg) in [(&a, &b), (&b, &a)] {
        for (hi, h) in pos.head.iter().enumerate() {
            for (bi, bt) in neg.body.iter().enumerate() {
                if let Some(theta) = unify(h, bt, true) {
                    let mut head: Vec<Term> = pos
                        .head
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != hi)
                        .map(|(_, t)| theta.apply(t))
                        .collect();
                    head.extend(neg.head.iter().map(|t| theta.apply(t)));
                    let mut body: Vec<Term> =
                        pos.body.iter().map(|t| theta.apply(t)).collect();
                    body.extend(
                        neg.body
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != bi)
                            .map(|(_, t)| theta.apply(t)),
                    );
                    out.push((GeneralClause::new(head, body), theta.apply(h), theta));
                }
            }
        }
    }
    out
}

/// Single-step factors: merging one unifiable pair of equal-sign literals.
pub fn factors(c: &GeneralClause, supply: &mut VarSupply) -> Vec<GeneralClause> {
    let c = c.rename_apart(supply);
    let mut out = Vec::new();
    let sides = [&c.head, &c.body];
    for (side_idx, side) in sides.iter().enumerate() {
        for i in 0..side.len() {
            for j in (i + 1)..side.len() {
                if let Some(theta) = unify(&side[i], &side[j], true) {
                    let f = c.apply(&theta);
                    let _ = side_idx;
                    out.push(f);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefuteOutcome {
    Refuted(usize),
    /// Saturated with no empty clause: the set is satisfiable as far as
    /// this strategy can tell.
    Saturated,
    /// Step budget exhausted before saturation.
    Budget,
}

pub struct RefuteResult {
    pub outcome: RefuteOutcome,
    pub refutation: Option<Refutation>,
}

struct Derived {
    clause: GeneralClause,
    parents: Option<(usize, usize, Term, Subst)>,
    level: u32,
}

/// Breadth-first saturation with duplicate elimination and single-step
/// factoring; returns a replayable refutation when one of at most
/// `max_steps` kept resolvents closes the set.
pub fn resolution_refute(clauses: &[GeneralClause], max_steps: usize) -> RefuteResult {
    let mut supply = VarSupply::new();
    let mut all: Vec<Derived> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for c in clauses {
        let key = c.canonical_key();
        if seen.insert(key) {
            all.push(Derived {
                clause: c.clone(),
                parents: None,
                level: 0,
            });
        }
        if c.is_empty() {
            // degenerate: an input already is the empty clause
            return RefuteResult {
                outcome: RefuteOutcome::Refuted(0),
                refutation: None,
            };
        }
    }
    let n_inputs = all.len();
    let mut steps_used = 0usize;
    let mut level = 0u32;
    loop {
        level += 1;
        let frontier: Vec<usize> = (0..all.len())
            .filter(|&i| all[i].level == level - 1)
            .collect();
        if frontier.is_empty() {
            return RefuteResult {
                outcome: RefuteOutcome::Saturated,
                refutation: None,
            };
        }
        let snapshot = all.len();
        // Resolvents are deduplicated as they are produced, so memory
        // stays proportional to the number of distinct kept clauses.
        // Tautologies (a clause whose head and body share an atom) are
        // dropped: tautology deletion preserves refutation completeness.
        let mut progressed = false;
        let keep = |entry: Derived,
                        all: &mut Vec<Derived>,
                        seen: &mut HashSet<String>,
                        steps_used: &mut usize,
                        progressed: &mut bool|
         -> Option<RefuteResult> {
            if !seen.insert(entry.clause.canonical_key()) {
                return None;
            }
            if entry
                .clause
                .head
                .iter()
                .any(|h| entry.clause.body.contains(h))
            {
                return None;
            }
            *steps_used += 1;
            let is_empty = entry.clause.is_empty();
            all.push(entry);
            *progressed = true;
            if is_empty {
                let refutation = build_refutation(all, n_inputs, all.len() - 1);
                return Some(RefuteResult {
                    outcome: RefuteOutcome::Refuted(*steps_used),
                    refutation: Some(refutation),
                });
            }
            if *steps_used >= max_steps {
                return Some(RefuteResult {
                    outcome: RefuteOutcome::Budget,
                    refutation: None,
                });
            }
            None
        };
        for &i in &frontier {
            for j in 0..snapshot {
                if !(j <= i || all[j].level < level - 1) {
                    continue;
                }
                let resolvents = resolve_clauses(&all[i].clause, &all[j].clause, &mut supply);
                for (r, atom, theta) in resolvents {
                    let entry = Derived {
                        clause: r,
                        parents: Some((i, j, atom, theta)),
                        level,
                    };
                    if let Some(result) =
                        keep(entry, &mut all, &mut seen, &mut steps_used, &mut progressed)
                    {
                        return result;
                    }
                }
            }
        }
        // factoring within frontier clauses
        for &i in &frontier {
            let fs = factors(&all[i].clause, &mut supply);
            for f in fs {
                // skip trivial self-factors equal to the parent
                if f.canonical_key() == all[i].clause.canonical_key() {
                    continue;
                }
                let atom = f
                    .head
                    .first()
                    .or(f.body.first())
                    .cloned()
                    .unwrap_or_else(|| Term::atom("true"));
                let entry = Derived {
                    clause: f,
                    parents: Some((i, i, atom, Subst::new())),
                    level,
                };
                if let Some(result) =
                    keep(entry, &mut all, &mut seen, &mut steps_used, &mut progressed)
                {
                    return result;
                }
            }
        }
        if !progressed {
            return RefuteResult {
                outcome: RefuteOutcome::Saturated,
                refutation: None,
            };
        }
    }
}

fn build_refutation(all: &[Derived], n_inputs: usize, target: usize) -> Refutation {
    // collect the ancestors of the final clause, in derivation order
    let mut needed: BTreeSet<usize> = BTreeSet::new();
    let mut stack = vec![target];
    while let Some(i) = stack.pop() {
        if needed.insert(i) {
            if let Some((a, b, _, _)) = &all[i].parents {
                stack.push(*a);
                stack.push(*b);
            }
        }
    }
    let inputs: Vec<GeneralClause> = (0..n_inputs).map(|i| all[i].clause.clone()).collect();
    let derived: Vec<usize> = needed.iter().copied().filter(|&i| i >= n_inputs).collect();
    let remap: HashMap<usize, usize> = derived
        .iter()
        .enumerate()
        .map(|(k, &i)| (i, n_inputs + k))
        .collect();
    let idx = |i: usize| -> usize {
        if i < n_inputs {
            i
        } else {
            remap[&i]
        }
    };
    let steps = derived
        .iter()
        .map(|&i| {
            let (a, b, atom, theta) = all[i].parents.clone().unwrap();
            RefStep {
                parents: (idx(a), idx(b)),
                atom: crate::reader::write_term_default(&atom),
                atom_term: atom,
                unifier: theta,
                resolvent: all[i].clause.to_string(),
                resolvent_clause: all[i].clause.clone(),
            }
        })
        .collect();
    Refutation { inputs, steps }
}

pub const ANSWER_PRED: &str = "$ans";

#[derive(Clone, Debug)]
pub struct FullClausalAnswer {
    pub substitution: Subst,
    pub refutation: Refutation,
}

/// The deliberately naive full-clausal interpreter: refutes
/// `cs ∪ {denial of goal}` by saturation, reading the answer off an
/// answer literal. No selection strategy, no indexing; the baseline the
/// definite-clause engine is measured against.
pub fn full_clausal_query(
    cs: &[GeneralClause],
    goal: &[Term],
    max_steps: usize,
) -> (RefuteOutcome, Option<FullClausalAnswer>) {
    let goal_vars: Vec<String> = {
        let mut vs = Vec::new();
        for g in goal {
            for v in g.variables() {
                if !vs.contains(&v) {
                    vs.push(v);
                }
            }
        }
        vs
    };
    let ans_args: Vec<Term> = goal_vars.iter().map(|v| Term::Var(v.clone())).collect();
    let ans_atom = Term::comp(ANSWER_PRED, ans_args.clone());
    let mut set = cs.to_vec();
    // ans(X̄) :- goal  and the closing denial :- ans(Ȳ)
    set.push(GeneralClause::new(vec![ans_atom.clone()], goal.to_vec()));
    let fresh: Vec<Term> = (0..goal_vars.len())
        .map(|i| Term::var(format!("_A{i}")))
        .collect();
    set.push(GeneralClause::denial(vec![Term::comp(ANSWER_PRED, fresh)]));
    let result = resolution_refute(&set, max_steps);
    match result.outcome {
        RefuteOutcome::Refuted(_) => {
            let refutation = match result.refutation {
                Some(r) => r,
                None => {
                    return (
                        RefuteOutcome::Refuted(0),
                        Some(FullClausalAnswer {
                            substitution: Subst::new(),
                            refutation: Refutation {
                                inputs: set,
                                steps: vec![],
                            },
                        }),
                    )
                }
            };
            // the last step that resolved on the answer predicate carries
            // the goal bindings in its resolved-upon atom
            let mut subst = Subst::new();
            for step in refutation.steps.iter().rev() {
                if let Term::Compound(f, args) = &step.atom_term {
                    if f == ANSWER_PRED && args.len() == goal_vars.len() {
                        for (v, t) in goal_vars.iter().zip(args) {
                            if t != &Term::Var(v.clone()) {
                                subst.bind(v.clone(), t.clone());
                            }
                        }
                        break;
                    }
                }
            }
            (
                result.outcome,
                Some(FullClausalAnswer {
                    substitution: subst,
                    refutation,
                }),
            )
        }
        other => (other, None),
    }
}

/// Checks returned answers against the least Herbrand model; lists every
/// violation (expected: none).
#[derive(Clone, Debug, Default)]
pub struct SoundnessReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

pub fn soundness_audit(
    p: &Program,
    answers: &[(Vec<Term>, Subst)],
    depth: u32,
) -> Result<SoundnessReport, ClausalError> {
    let lm = least_herbrand_model(p, depth, 10_000)?;
    let mut report = SoundnessReport::default();
    for (goal, subst) in answers {
        report.checked += 1;
        for atom in goal {
            let instance = subst.apply(atom);
            if !lm.model.satisfies(&instance) {
                report
                    .violations
                    .push(format!("{instance} is not in the least Herbrand model"));
            }
        }
    }
    Ok(report)
}
