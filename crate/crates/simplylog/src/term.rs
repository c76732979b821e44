//! Terms, substitutions, unification and anti-unification: the symbolic
//! kernel everything else builds on.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

/// A first-order term. Lists are `'.'/2` chains ending in the atom `[]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(String),
    Atom(String),
    Int(i64),
    Compound(String, Vec<Term>),
}

pub const NIL: &str = "[]";
pub const CONS: &str = ".";

impl Term {
    pub fn atom(name: impl Into<String>) -> Term {
        Term::Atom(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn comp(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        if args.is_empty() {
            Term::Atom(functor)
        } else {
            Term::Compound(functor, args)
        }
    }

    pub fn nil() -> Term {
        Term::Atom(NIL.into())
    }

    /// Builds a proper list from the given elements.
    pub fn list(items: Vec<Term>) -> Term {
        Self::partial_list(items, Term::nil())
    }

    /// Builds `[i1,...,in|tail]`.
    pub fn partial_list(items: Vec<Term>, tail: Term) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::Compound(CONS.into(), vec![item, acc]))
    }

    /// Decomposes a proper list into its elements; `None` for partial or
    /// non-list terms.
    pub fn as_list(&self) -> Option<Vec<Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Atom(a) if a == NIL => return Some(items),
                Term::Compound(f, args) if f == CONS && args.len() == 2 => {
                    items.push(args[0].clone());
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// Functor name and arity; atoms have arity 0.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) | Term::Int(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Free variables in left-to-right first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::Atom(_) | Term::Int(_) => {}
            Term::Compound(_, args) => {
                for a in args {
                    a.collect_variables(out);
                }
            }
        }
    }

    fn occurs(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Atom(_) | Term::Int(_) => false,
            Term::Compound(_, args) => args.iter().any(|a| a.occurs(var)),
        }
    }

    /// The standard order of terms: Var < Int < Atom < Compound, compounds
    /// by arity, then functor, then arguments left to right.
    pub fn std_cmp(&self, other: &Term) -> Ordering {
        fn rank(t: &Term) -> u8 {
            match t {
                Term::Var(_) => 0,
                Term::Int(_) => 1,
                Term::Atom(_) => 2,
                Term::Compound(..) => 3,
            }
        }
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Int(a), Term::Int(b)) => a.cmp(b),
            (Term::Atom(a), Term::Atom(b)) => a.cmp(b),
            (Term::Compound(f, a), Term::Compound(g, b)) => a
                .len()
                .cmp(&b.len())
                .then_with(|| f.cmp(g))
                .then_with(|| {
                    for (x, y) in a.iter().zip(b.iter()) {
                        let o = x.std_cmp(y);
                        if o != Ordering::Equal {
                            return o;
                        }
                    }
                    Ordering::Equal
                }),
            _ => rank(self).cmp(&rank(other)),
        }
    }

    /// Structural equality up to a consistent renaming of variables.
    pub fn is_variant_of(&self, other: &Term) -> bool {
        fn go(a: &Term, b: &Term, fwd: &mut HashMap<String, String>, bwd: &mut HashMap<String, String>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let f = fwd.entry(x.clone()).or_insert_with(|| y.clone());
                    let g = bwd.entry(y.clone()).or_insert_with(|| x.clone());
                    f == y && g == x
                }
                (Term::Atom(x), Term::Atom(y)) => x == y,
                (Term::Int(x), Term::Int(y)) => x == y,
                (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                    f == g
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| go(x, y, fwd, bwd))
                }
                _ => false,
            }
        }
        go(self, other, &mut HashMap::new(), &mut HashMap::new())
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<Ordering> {
        Some(self.std_cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Term) -> Ordering {
        self.std_cmp(other)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::reader::write_term_default(self))
    }
}

/// A finite map from variables to terms, applied simultaneously.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Subst {
    bindings: BTreeMap<String, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn singleton(var: impl Into<String>, t: Term) -> Subst {
        let mut s = Subst::new();
        s.bind(var.into(), t);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    /// Adds a binding, dropping x ↦ x.
    pub fn bind(&mut self, var: String, t: Term) {
        if let Term::Var(v) = &t {
            if *v == var {
                return;
            }
        }
        self.bindings.insert(var, t);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    /// Simultaneous application: every bound variable in `t` is replaced,
    /// bindings are not chased through each other.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.bindings.get(v) {
                Some(bound) => bound.clone(),
                None => t.clone(),
            },
            Term::Atom(_) | Term::Int(_) => t.clone(),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// Composition: `compose(s1, s2).apply(t) == s2.apply(&s1.apply(t))`.
    pub fn compose(&self, other: &Subst) -> Subst {
        let mut out = Subst::new();
        for (v, t) in &self.bindings {
            out.bind(v.clone(), other.apply(t));
        }
        for (v, t) in &other.bindings {
            if !self.bindings.contains_key(v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }

    /// Restriction to the given variables.
    pub fn restrict(&self, vars: &[String]) -> Subst {
        let mut out = Subst::new();
        for (v, t) in &self.bindings {
            if vars.iter().any(|x| x == v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        write!(f, "}}")
    }
}

/// Source of fresh variables; issued names `_G<n>` never collide with
/// reader output because the reader freshens every `_`-prefixed variable.
#[derive(Clone, Debug, Default)]
pub struct VarSupply {
    counter: u64,
}

impl VarSupply {
    pub fn new() -> VarSupply {
        VarSupply::default()
    }

    pub fn fresh(&mut self) -> String {
        let n = self.counter;
        self.counter += 1;
        format!("_G{n}")
    }

    pub fn fresh_var(&mut self) -> Term {
        Term::Var(self.fresh())
    }
}

/// Computes an idempotent most general unifier of `t1` and `t2`, or `None`
/// when none exists. With `occurs_check` off, cyclic bindings are accepted
/// the way most Prologs do; every soundness-sensitive caller leaves it on.
pub fn unify(t1: &Term, t2: &Term, occurs_check: bool) -> Option<Subst> {
    let mut subst = Subst::new();
    let mut work = vec![(t1.clone(), t2.clone())];
    while let Some((a, b)) = work.pop() {
        let a = subst.apply(&a);
        let b = subst.apply(&b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), _) => {
                if occurs_check && b.occurs(x) {
                    return None;
                }
                bind_and_normalize(&mut subst, x.clone(), b);
            }
            (_, Term::Var(y)) => {
                if occurs_check && a.occurs(y) {
                    return None;
                }
                bind_and_normalize(&mut subst, y.clone(), a);
            }
            (Term::Atom(x), Term::Atom(y)) if x == y => {}
            (Term::Int(x), Term::Int(y)) if x == y => {}
            (Term::Compound(f, xs), Term::Compound(g, ys))
                if f == g && xs.len() == ys.len() =>
            {
                for (x, y) in xs.iter().zip(ys.iter()) {
                    work.push((x.clone(), y.clone()));
                }
            }
            _ => return None,
        }
    }
    Some(subst)
}

// Keeps the accumulated substitution idempotent: the new binding is pushed
// through every existing right-hand side before insertion.
fn bind_and_normalize(subst: &mut Subst, var: String, t: Term) {
    let single = Subst::singleton(var.clone(), t.clone());
    let rebound: Vec<(String, Term)> = subst
        .bindings
        .iter()
        .map(|(v, old)| (v.clone(), single.apply(old)))
        .collect();
    for (v, nt) in rebound {
        subst.bindings.insert(v, nt);
    }
    subst.bind(var, t);
}

/// Anti-unification with a disagreement map shared across calls, so that
/// clause-level lgg can reuse one variable per disagreement pair.
#[derive(Default)]
pub struct AntiUnifier {
    map: HashMap<(Term, Term), String>,
    supply: VarSupply,
}

impl AntiUnifier {
    pub fn new() -> AntiUnifier {
        AntiUnifier::default()
    }

    pub fn generalize(&mut self, t1: &Term, t2: &Term) -> Term {
        match (t1, t2) {
            (Term::Compound(f, xs), Term::Compound(g, ys))
                if f == g && xs.len() == ys.len() =>
            {
                Term::Compound(
                    f.clone(),
                    xs.iter().zip(ys).map(|(x, y)| self.generalize(x, y)).collect(),
                )
            }
            _ if t1 == t2 => t1.clone(),
            _ => {
                let key = (t1.clone(), t2.clone());
                let name = match self.map.get(&key) {
                    Some(n) => n.clone(),
                    None => {
                        let n = self.supply.fresh();
                        self.map.insert(key, n.clone());
                        n
                    }
                };
                Term::Var(name)
            }
        }
    }

    /// The substitutions mapping the generalization back onto each input.
    pub fn instantiations(&self) -> (Subst, Subst) {
        let mut s1 = Subst::new();
        let mut s2 = Subst::new();
        for ((t1, t2), v) in &self.map {
            s1.bind(v.clone(), t1.clone());
            s2.bind(v.clone(), t2.clone());
        }
        (s1, s2)
    }
}

/// Least general generalization of two terms: returns `(g, s1, s2)` with
/// `s1.apply(&g) == t1` and `s2.apply(&g) == t2`.
pub fn anti_unify(t1: &Term, t2: &Term) -> (Term, Subst, Subst) {
    let mut au = AntiUnifier::new();
    let g = au.generalize(t1, t2);
    let (s1, s2) = au.instantiations();
    (g, s1, s2)
}

/// Renames the variables of `terms` to fresh ones from `supply`, keeping
/// shared occurrences shared.
pub fn rename_terms(terms: &[Term], supply: &mut VarSupply) -> Vec<Term> {
    let mut renaming = Subst::new();
    for t in terms {
        for v in t.variables() {
            if renaming.get(&v).is_none() {
                renaming.bind(v, supply.fresh_var());
            }
        }
    }
    terms.iter().map(|t| renaming.apply(t)).collect()
}
