//! Independent oracles for the acceptance suite. Everything here
//! recomputes results by brute force or by textbook reference
//! algorithms, sharing as little machinery with the engine as possible.

#![allow(dead_code)]

use simplylog::fol::Formula;
use simplylog::lang::{GrammarRule, RhsItem};
use simplylog::{GeneralClause, Subst, Term};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};

pub fn corpus_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(rel)
}

// ---------------------------------------------------------------------
// Propositional clause sets, represented independently of the library:
// clause = (positive literal indices, negative literal indices).

pub type PropClause = (Vec<usize>, Vec<usize>);

/// True when the bitmask interpretation satisfies the clause
/// (some positive literal true, or some negative literal false).
pub fn prop_clause_true(clause: &PropClause, mask: u32) -> bool {
    clause.0.iter().any(|&i| mask & (1 << i) != 0)
        || clause.1.iter().any(|&i| mask & (1 << i) == 0)
}

/// All models of a propositional clause set over `n` atoms.
pub fn prop_models(clauses: &[PropClause], n: usize) -> Vec<u32> {
    (0u32..1 << n)
        .filter(|&mask| clauses.iter().all(|c| prop_clause_true(c, mask)))
        .collect()
}

/// The intersection of all models; `None` when the set is unsatisfiable.
pub fn minimal_model_intersection(clauses: &[PropClause], n: usize) -> Option<u32> {
    let models = prop_models(clauses, n);
    if models.is_empty() {
        return None;
    }
    Some(models.iter().fold((1u32 << n) - 1, |acc, m| acc & m))
}

// ---------------------------------------------------------------------
// Graph search oracles.

/// Dijkstra distances from `start` over a weighted digraph.
pub fn dijkstra(
    edges: &HashMap<String, Vec<(String, i64)>>,
    start: &str,
) -> HashMap<String, i64> {
    let mut dist: HashMap<String, i64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start.to_string(), 0);
    heap.push(std::cmp::Reverse((0i64, start.to_string())));
    while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
        if dist.get(&u).copied() != Some(d) {
            continue;
        }
        for (v, w) in edges.get(&u).into_iter().flatten() {
            let nd = d + w;
            if dist.get(v).map_or(true, |&old| nd < old) {
                dist.insert(v.clone(), nd);
                heap.push(std::cmp::Reverse((nd, v.clone())));
            }
        }
    }
    dist
}

/// Fewest-edges distances from `start`, ignoring weights.
pub fn bfs_hops(
    edges: &HashMap<String, Vec<(String, i64)>>,
    start: &str,
) -> HashMap<String, usize> {
    let mut dist: HashMap<String, usize> = HashMap::new();
    let mut q = VecDeque::new();
    dist.insert(start.to_string(), 0);
    q.push_back(start.to_string());
    while let Some(u) = q.pop_front() {
        let d = dist[&u];
        for (v, _) in edges.get(&u).into_iter().flatten() {
            if !dist.contains_key(v) {
                dist.insert(v.clone(), d + 1);
                q.push_back(v.clone());
            }
        }
    }
    dist
}

// ---------------------------------------------------------------------
// Finite first-order model checking by exhaustive enumeration.

/// Function and predicate tables over the domain {0, .., d-1}. A symbol
/// of arity k is tabulated over all d^k argument tuples, indexed by
/// little-endian radix-d encoding.
#[derive(Clone, Debug)]
pub struct Interp {
    pub domain: usize,
    pub functions: BTreeMap<(String, usize), Vec<usize>>,
    pub predicates: BTreeMap<(String, usize), Vec<bool>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoSignature {
    pub functions: BTreeSet<(String, usize)>,
    pub predicates: BTreeSet<(String, usize)>,
}

fn note_term(t: &Term, sig: &mut FoSignature) {
    match t {
        Term::Var(_) => {}
        Term::Atom(a) => {
            sig.functions.insert((a.clone(), 0));
        }
        Term::Int(_) => panic!("integers are outside the finite-model fragment"),
        Term::Compound(f, args) => {
            sig.functions.insert((f.clone(), args.len()));
            for a in args {
                note_term(a, sig);
            }
        }
    }
}

fn note_atom(t: &Term, sig: &mut FoSignature) {
    match t {
        // Logical constants, not predicates.
        Term::Atom(p) if p == "true" || p == "false" || p == "fail" => {}
        Term::Atom(p) => {
            sig.predicates.insert((p.clone(), 0));
        }
        Term::Compound(p, args) => {
            sig.predicates.insert((p.clone(), args.len()));
            for a in args {
                note_term(a, sig);
            }
        }
        _ => panic!("bad atom in signature collection: {t}"),
    }
}

pub fn formula_signature(f: &Formula, sig: &mut FoSignature) {
    match f {
        Formula::Atom(t) => note_atom(t, sig),
        Formula::Equals(a, b) => {
            note_term(a, sig);
            note_term(b, sig);
        }
        Formula::Not(g) => formula_signature(g, sig),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            formula_signature(a, sig);
            formula_signature(b, sig);
        }
        Formula::Forall(_, g) | Formula::Exists(_, g) => formula_signature(g, sig),
    }
}

pub fn clause_signature(c: &GeneralClause, sig: &mut FoSignature) {
    for a in c.head.iter().chain(&c.body) {
        note_atom(a, sig);
    }
}

/// Number of interpretations of the signature over a domain of size d.
pub fn interp_count(sig: &FoSignature, d: usize) -> f64 {
    let mut total = 1f64;
    for (_, k) in &sig.functions {
        total *= (d as f64).powi(d.pow(*k as u32) as i32);
    }
    for (_, k) in &sig.predicates {
        total *= 2f64.powi(d.pow(*k as u32) as i32);
    }
    total
}

/// Enumerates every interpretation, calling `visit` until it returns
/// true; returns whether any visit returned true.
pub fn any_interp(sig: &FoSignature, d: usize, visit: &mut dyn FnMut(&Interp) -> bool) -> bool {
    let funcs: Vec<(String, usize)> = sig.functions.iter().cloned().collect();
    let preds: Vec<(String, usize)> = sig.predicates.iter().cloned().collect();
    let mut interp = Interp {
        domain: d,
        functions: funcs
            .iter()
            .map(|(f, k)| ((f.clone(), *k), vec![0usize; d.pow(*k as u32)]))
            .collect(),
        predicates: preds
            .iter()
            .map(|(p, k)| ((p.clone(), *k), vec![false; d.pow(*k as u32)]))
            .collect(),
    };
    enumerate_functions(&funcs, 0, d, &mut interp, &preds, visit)
}

fn enumerate_functions(
    funcs: &[(String, usize)],
    i: usize,
    d: usize,
    interp: &mut Interp,
    preds: &[(String, usize)],
    visit: &mut dyn FnMut(&Interp) -> bool,
) -> bool {
    if i == funcs.len() {
        return enumerate_predicates(preds, 0, interp, visit);
    }
    let key = funcs[i].clone();
    let cells = interp.functions[&key].len();
    // Count through all d^cells tables in radix d.
    let mut table = vec![0usize; cells];
    loop {
        interp.functions.insert(key.clone(), table.clone());
        if enumerate_functions(funcs, i + 1, d, interp, preds, visit) {
            return true;
        }
        let mut pos = 0;
        loop {
            if pos == cells {
                return false;
            }
            table[pos] += 1;
            if table[pos] < d {
                break;
            }
            table[pos] = 0;
            pos += 1;
        }
    }
}

fn enumerate_predicates(
    preds: &[(String, usize)],
    i: usize,
    interp: &mut Interp,
    visit: &mut dyn FnMut(&Interp) -> bool,
) -> bool {
    if i == preds.len() {
        return visit(interp);
    }
    let key = preds[i].clone();
    let cells = interp.predicates[&key].len();
    for bits in 0u64..1 << cells {
        let table: Vec<bool> = (0..cells).map(|c| bits & (1 << c) != 0).collect();
        interp.predicates.insert(key.clone(), table);
        if enumerate_predicates(preds, i + 1, interp, visit) {
            return true;
        }
    }
    false
}

pub fn eval_term(t: &Term, env: &HashMap<String, usize>, interp: &Interp) -> usize {
    match t {
        Term::Var(v) => *env.get(v).unwrap_or_else(|| panic!("unbound {v}")),
        Term::Atom(a) => interp.functions[&(a.clone(), 0)][0],
        Term::Int(_) => panic!("integers are outside the finite-model fragment"),
        Term::Compound(f, args) => {
            let mut idx = 0;
            for a in args.iter().rev() {
                idx = idx * interp.domain + eval_term(a, env, interp);
            }
            interp.functions[&(f.clone(), args.len())][idx]
        }
    }
}

pub fn eval_atom(t: &Term, env: &HashMap<String, usize>, interp: &Interp) -> bool {
    match t {
        Term::Atom(p) if p == "true" => true,
        Term::Atom(p) if p == "false" || p == "fail" => false,
        Term::Atom(p) => interp.predicates[&(p.clone(), 0)][0],
        Term::Compound(p, args) => {
            let mut idx = 0;
            for a in args.iter().rev() {
                idx = idx * interp.domain + eval_term(a, env, interp);
            }
            interp.predicates[&(p.clone(), args.len())][idx]
        }
        _ => panic!("bad atom: {t}"),
    }
}

pub fn eval_formula(f: &Formula, env: &mut HashMap<String, usize>, interp: &Interp) -> bool {
    match f {
        Formula::Atom(t) => eval_atom(t, env, interp),
        Formula::Equals(a, b) => eval_term(a, env, interp) == eval_term(b, env, interp),
        Formula::Not(g) => !eval_formula(g, env, interp),
        Formula::And(a, b) => eval_formula(a, env, interp) && eval_formula(b, env, interp),
        Formula::Or(a, b) => eval_formula(a, env, interp) || eval_formula(b, env, interp),
        Formula::Implies(a, b) => !eval_formula(a, env, interp) || eval_formula(b, env, interp),
        Formula::Iff(a, b) => eval_formula(a, env, interp) == eval_formula(b, env, interp),
        Formula::Forall(v, g) => {
            let saved = env.get(v).copied();
            let ok = (0..interp.domain).all(|e| {
                env.insert(v.clone(), e);
                eval_formula(g, env, interp)
            });
            restore(env, v, saved);
            ok
        }
        Formula::Exists(v, g) => {
            let saved = env.get(v).copied();
            let ok = (0..interp.domain).any(|e| {
                env.insert(v.clone(), e);
                eval_formula(g, env, interp)
            });
            restore(env, v, saved);
            ok
        }
    }
}

fn restore(env: &mut HashMap<String, usize>, v: &str, saved: Option<usize>) {
    match saved {
        Some(e) => {
            env.insert(v.to_string(), e);
        }
        None => {
            env.remove(v);
        }
    }
}

/// True when the interpretation satisfies the universal closure of the
/// clause: for every assignment, body all true implies some head true.
pub fn eval_clause(c: &GeneralClause, interp: &Interp) -> bool {
    let vars: Vec<String> = c.variables().into_iter().collect();
    let mut env = HashMap::new();
    all_assignments(&vars, 0, interp.domain, &mut env, &mut |env| {
        !c.body.iter().all(|b| eval_atom(b, env, interp))
            || c.head.iter().any(|h| eval_atom(h, env, interp))
    })
}

fn all_assignments(
    vars: &[String],
    i: usize,
    d: usize,
    env: &mut HashMap<String, usize>,
    check: &mut dyn FnMut(&HashMap<String, usize>) -> bool,
) -> bool {
    if i == vars.len() {
        return check(env);
    }
    for e in 0..d {
        env.insert(vars[i].clone(), e);
        if !all_assignments(vars, i + 1, d, env, check) {
            return false;
        }
    }
    env.remove(&vars[i]);
    true
}

// ---------------------------------------------------------------------
// Term utilities for the unification and subsumption oracles.

/// One-way matching: extends `theta` so that theta(pattern) == target.
pub fn oracle_match(pattern: &Term, target: &Term, theta: &mut BTreeMap<String, Term>) -> bool {
    match pattern {
        Term::Var(v) => match theta.get(v) {
            Some(bound) => bound == target,
            None => {
                theta.insert(v.clone(), target.clone());
                true
            }
        },
        Term::Atom(_) | Term::Int(_) => pattern == target,
        Term::Compound(f, args) => match target {
            Term::Compound(g, bargs) if f == g && args.len() == bargs.len() => args
                .iter()
                .zip(bargs)
                .all(|(a, b)| oracle_match(a, b, theta)),
            _ => false,
        },
    }
}

/// Variance: each term matches the other with a variable-to-variable
/// bijection.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    fn var_bijection(a: &Term, b: &Term, map: &mut BTreeMap<String, String>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => match map.get(x) {
                Some(bound) => bound == y,
                None => {
                    if map.values().any(|v| v == y) {
                        return false;
                    }
                    map.insert(x.clone(), y.clone());
                    true
                }
            },
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| var_bijection(x, y, map))
            }
            _ => false,
        }
    }
    var_bijection(a, b, &mut BTreeMap::new()) && var_bijection(b, a, &mut BTreeMap::new())
}

/// All subterms of a term, including itself.
pub fn subterms(t: &Term, out: &mut Vec<Term>) {
    if !out.contains(t) {
        out.push(t.clone());
    }
    if let Term::Compound(_, args) = t {
        for a in args {
            subterms(a, out);
        }
    }
}

/// Brute-force theta-subsumption: does some substitution over vars(c),
/// ranging over subterms of d, map head to head and body into body?
pub fn subsumes_bruteforce(c: &GeneralClause, d: &GeneralClause) -> bool {
    let mut vars = Vec::new();
    for v in c.variables() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let mut range = Vec::new();
    for a in d.head.iter().chain(&d.body) {
        if let Term::Compound(_, args) = a {
            for t in args {
                subterms(t, &mut range);
            }
        }
    }
    // Also allow the identity image for variables of c.
    for v in &vars {
        let t = Term::Var(v.clone());
        if !range.contains(&t) {
            range.push(t);
        }
    }
    let mut assignment = vec![0usize; vars.len()];
    loop {
        let mut s = Subst::new();
        for (v, &i) in vars.iter().zip(&assignment) {
            s.bind(v.clone(), range[i].clone());
        }
        let head_ok = match (c.head.first(), d.head.first()) {
            (Some(ch), Some(dh)) => &s.apply(ch) == dh,
            (None, None) => true,
            _ => false,
        };
        if head_ok && c.body.iter().all(|b| d.body.contains(&s.apply(b))) {
            return true;
        }
        let mut pos = 0;
        loop {
            if pos == assignment.len() {
                return false;
            }
            assignment[pos] += 1;
            if assignment[pos] < range.len() {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

// ---------------------------------------------------------------------
// Recursive-descent derivation counting for grammars. Arguments on
// nonterminals are ignored: for the shipped grammars every rule choice
// fixes its arguments, so the count is unaffected.

pub fn grammar_lexicon(rules: &[GrammarRule]) -> Vec<String> {
    let mut lex = BTreeSet::new();
    for r in rules {
        for item in &r.rhs {
            if let RhsItem::Terminals(ts) = item {
                for t in ts {
                    if let Term::Atom(a) = t {
                        lex.insert(a.clone());
                    }
                }
            }
        }
    }
    lex.into_iter().collect()
}

fn rule_name(t: &Term) -> &str {
    match t {
        Term::Atom(a) => a,
        Term::Compound(f, _) => f,
        _ => panic!("bad nonterminal: {t}"),
    }
}

/// Number of leftmost derivations of exactly `tokens` from `nt`.
pub fn count_derivations(rules: &[GrammarRule], nt: &str, tokens: &[String]) -> usize {
    fn seq(rules: &[GrammarRule], items: &[RhsItem], tokens: &[String]) -> usize {
        match items.split_first() {
            None => usize::from(tokens.is_empty()),
            Some((RhsItem::Goal(_), rest)) => seq(rules, rest, tokens),
            Some((RhsItem::Terminals(ts), rest)) => {
                if ts.len() > tokens.len() {
                    return 0;
                }
                let matches = ts.iter().zip(tokens).all(|(t, tok)| match t {
                    Term::Atom(a) => a == tok,
                    _ => false,
                });
                if matches {
                    seq(rules, rest, &tokens[ts.len()..])
                } else {
                    0
                }
            }
            Some((RhsItem::Nonterminal(n), rest)) => {
                let mut total = 0;
                for split in 0..=tokens.len() {
                    let inner = derive(rules, rule_name(n), &tokens[..split]);
                    if inner > 0 {
                        total += inner * seq(rules, rest, &tokens[split..]);
                    }
                }
                total
            }
        }
    }
    fn derive(rules: &[GrammarRule], nt: &str, tokens: &[String]) -> usize {
        rules
            .iter()
            .filter(|r| rule_name(&r.lhs) == nt)
            .map(|r| seq(rules, &r.rhs, tokens))
            .sum()
    }
    derive(rules, nt, tokens)
}

/// All token sequences of length 1..=max over the lexicon, in order.
pub fn all_sentences(lexicon: &[String], max: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(lex: &[String], max: usize, cur: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for w in lex {
            cur.push(w.clone());
            rec(lex, max, cur, out);
            cur.pop();
        }
    }
    rec(lexicon, max, &mut current, &mut out);
    out
}
