//! Reasoning with incomplete information beyond negation as failure:
//! abductive explanation finding over declared abducible predicates, and
//! defeasible default rules with named exceptions.

use crate::clausal::{conjuncts, GeneralClause, Program};
use crate::reader::{parse_program, write_term_default, ClauseKind, SourceClause};
use crate::sld::{self, EngineError, EngineLimits, Flags, Strategy};
use crate::term::{unify, Subst, Term, VarSupply};
use std::collections::{BTreeSet, HashMap, HashSet};

#[derive(Clone, Debug)]
pub struct AbductionSpec {
    pub program: Program,
    pub abducibles: HashSet<(String, usize)>,
    /// Denial bodies: no constraint body may become derivable.
    pub constraints: Vec<Vec<Term>>,
}

impl AbductionSpec {
    pub fn new(
        program: Program,
        abducibles: impl IntoIterator<Item = (String, usize)>,
        constraints: Vec<Vec<Term>>,
    ) -> Result<AbductionSpec, String> {
        let abducibles: HashSet<(String, usize)> = abducibles.into_iter().collect();
        for (name, arity) in &abducibles {
            if program.defines(name, *arity) {
                return Err(format!(
                    "abducible {name}/{arity} must not have defining clauses"
                ));
            }
        }
        Ok(AbductionSpec {
            program,
            abducibles,
            constraints,
        })
    }
}

/// A set of ground atoms over abducible predicates; ordered for stable
/// display and comparison.
pub type Explanation = BTreeSet<Term>;

struct Abducer<'a> {
    spec: &'a AbductionSpec,
    limits: EngineLimits,
    supply: VarSupply,
    nodes: u64,
    found: Vec<Explanation>,
}

impl<'a> Abducer<'a> {
    fn charge(&mut self) -> Result<(), EngineError> {
        self.nodes += 1;
        if let Some(max) = self.limits.max_nodes {
            if self.nodes > max {
                return Err(EngineError::ResourcesExhausted);
            }
        }
        Ok(())
    }

    fn is_abducible(&self, t: &Term) -> bool {
        t.functor()
            .map(|(f, a)| self.spec.abducibles.contains(&(f.to_string(), a)))
            .unwrap_or(false)
    }

    /// Depth-first SLD with a residue of abduced atoms.
    fn solve(
        &mut self,
        goals: &[Term],
        subst: &Subst,
        delta: &Explanation,
        depth: u32,
    ) -> Result<(), EngineError> {
        if let Some(max) = self.limits.max_depth {
            if depth > max {
                // depth-clipped branches are pruned, not reported
                return Ok(());
            }
        }
        let Some(first) = goals.first() else {
            if self.respects_constraints(delta)? {
                self.found.push(delta.clone());
            }
            return Ok(());
        };
        let goal = subst.apply(first);
        let rest = &goals[1..];
        let (name, arity) = goal
            .functor()
            .map(|(f, a)| (f.to_string(), a))
            .ok_or_else(|| EngineError::Type(format!("callable expected, found {goal}")))?;
        self.charge()?;
        match (name.as_str(), arity) {
            ("true", 0) => self.solve(rest, subst, delta, depth),
            ("fail", 0) | ("false", 0) => Ok(()),
            (",", 2) => {
                let mut inner = conjuncts(&goal).map_err(EngineError::Type)?;
                inner.extend(rest.iter().cloned());
                self.solve(&inner, subst, delta, depth)
            }
            ("=", 2) => {
                let Term::Compound(_, args) = &goal else {
                    unreachable!()
                };
                match unify(&args[0], &args[1], true) {
                    Some(theta) => self.solve(rest, &subst.compose(&theta), delta, depth),
                    None => Ok(()),
                }
            }
            ("is", 2) | ("<", 2) | (">", 2) | ("=<", 2) | (">=", 2) | ("=:=", 2) | ("=\\=", 2) => {
                self.solve_arith(&name, &goal, rest, subst, delta, depth)
            }
            ("\\+", 1) => {
                let Term::Compound(_, args) = &goal else {
                    unreachable!()
                };
                if !args[0].is_ground() {
                    return Err(EngineError::Instantiation(format!(
                        "\\+ requires a ground goal, got {}",
                        args[0]
                    )));
                }
                // abducing inside a negated goal would be unsound; only
                // residue-free failure counts, residue-extending success
                // is rejected outright
                let mut sub = Abducer {
                    spec: self.spec,
                    limits: self.limits,
                    supply: self.supply.clone(),
                    nodes: self.nodes,
                    found: Vec::new(),
                };
                sub.solve(&[args[0].clone()], &Subst::new(), delta, depth)?;
                self.nodes = sub.nodes;
                if sub.found.iter().any(|d| d != delta) {
                    return Err(EngineError::Type(format!(
                        "goal \\+ {} would require abduction inside negation",
                        args[0]
                    )));
                }
                if sub.found.is_empty() {
                    self.solve(rest, subst, delta, depth)
                } else {
                    Ok(())
                }
            }
            _ if self.is_abducible(&goal) => {
                // reuse an already-abduced atom (alternatives), then add new
                for known in delta.iter().cloned().collect::<Vec<_>>() {
                    if let Some(theta) = unify(&goal, &known, true) {
                        self.solve(rest, &subst.compose(&theta), delta, depth + 1)?;
                    }
                }
                if goal.is_ground() {
                    if !delta.contains(&goal) {
                        let mut extended = delta.clone();
                        extended.insert(goal.clone());
                        self.solve(rest, subst, &extended, depth + 1)?;
                    }
                    Ok(())
                } else if delta.iter().any(|k| unify(&goal, k, true).is_some()) {
                    Ok(())
                } else {
                    Err(EngineError::Instantiation(format!(
                        "abducible call {goal} is not ground"
                    )))
                }
            }
            _ => {
                if !self.spec.program.defines(&name, arity) {
                    return Err(EngineError::Undefined { name, arity });
                }
                let positions: Vec<usize> =
                    self.spec.program.matching(&name, arity).to_vec();
                for idx in positions {
                    let clause = self.spec.program.clauses()[idx].rename_apart(&mut self.supply);
                    if let Some(theta) = unify(&goal, &clause.head[0], true) {
                        let mut next: Vec<Term> = clause.body.clone();
                        next.extend(rest.iter().cloned());
                        self.solve(&next, &subst.compose(&theta), delta, depth + 1)?;
                    }
                }
                Ok(())
            }
        }
    }

    fn solve_arith(
        &mut self,
        name: &str,
        goal: &Term,
        rest: &[Term],
        subst: &Subst,
        delta: &Explanation,
        depth: u32,
    ) -> Result<(), EngineError> {
        let Term::Compound(_, args) = goal else {
            unreachable!()
        };
        if name == "is" {
            let v = sld::eval_arith(&args[1])?;
            return match unify(&args[0], &Term::Int(v), true) {
                Some(theta) => self.solve(rest, &subst.compose(&theta), delta, depth),
                None => Ok(()),
            };
        }
        let l = sld::eval_arith(&args[0])?;
        let r = sld::eval_arith(&args[1])?;
        let ok = match name {
            "<" => l < r,
            ">" => l > r,
            "=<" => l <= r,
            ">=" => l >= r,
            "=:=" => l == r,
            _ => l != r,
        };
        if ok {
            self.solve(rest, subst, delta, depth)
        } else {
            Ok(())
        }
    }

    fn respects_constraints(&mut self, delta: &Explanation) -> Result<bool, EngineError> {
        if self.spec.constraints.is_empty() {
            return Ok(true);
        }
        let augmented = program_with(&self.spec.program, delta);
        for body in &self.spec.constraints {
            let derivable = sld::solve_all(
                &augmented,
                body,
                Strategy::DepthFirst,
                EngineLimits {
                    max_depth: self.limits.max_depth.or(Some(64)),
                    max_nodes: self.limits.max_nodes.or(Some(100_000)),
                },
                Flags {
                    undefined_is_error: false,
                    ..Flags::default()
                },
            );
            match derivable {
                Ok(v) if !v.is_empty() => return Ok(false),
                Ok(_) => {}
                Err(EngineError::ResourcesExhausted) => {
                    return Err(EngineError::ResourcesExhausted)
                }
                Err(e) => return Err(e),
            }
        }
        Ok(true)
    }
}

/// The program extended with an explanation's atoms as facts.
pub fn program_with(program: &Program, delta: &Explanation) -> Program {
    let mut p = program.clone();
    for atom in delta {
        p.push(GeneralClause::new(vec![atom.clone()], vec![]));
    }
    p
}

/// Finds explanations for `goal`: sets Δ of ground abducible atoms such
/// that program ∪ Δ derives the goal and no constraint body becomes
/// derivable. Returned in derivation order, filtered to the minimal
/// ones: an explanation with a strict subset elsewhere in the
/// enumeration is dropped.
pub fn abduce(
    spec: &AbductionSpec,
    goal: &[Term],
    limits: EngineLimits,
) -> Result<Vec<Explanation>, EngineError> {
    let mut abducer = Abducer {
        spec,
        limits,
        supply: VarSupply::new(),
        nodes: 0,
        found: Vec::new(),
    };
    abducer.solve(goal, &Subst::new(), &Explanation::new(), 0)?;
    let found = abducer.found;
    let mut out: Vec<Explanation> = Vec::new();
    for delta in &found {
        if out.contains(delta) {
            continue;
        }
        // Keep only minimal explanations: drop any with a strict subset
        // elsewhere in the enumeration, regardless of discovery order.
        if found
            .iter()
            .any(|other| other != delta && other.is_subset(delta))
        {
            continue;
        }
        out.push(delta.clone());
    }
    Ok(out)
}

/// Confirms that program ∪ Δ derives the goal, via the SLD engine.
pub fn replay_explanation(
    spec: &AbductionSpec,
    goal: &[Term],
    delta: &Explanation,
    limits: EngineLimits,
) -> Result<bool, EngineError> {
    let augmented = program_with(&spec.program, delta);
    let answers = sld::solve_all(
        &augmented,
        goal,
        Strategy::DepthFirst,
        limits,
        Flags {
            undefined_is_error: false,
            ..Flags::default()
        },
    )?;
    Ok(!answers.is_empty())
}

// ---------------------------------------------------------------------
// defeasible default rules

#[derive(Clone, Debug)]
pub struct DefaultRule {
    pub name: String,
    pub prerequisite: Vec<Term>,
    pub conclusion: Term,
}

#[derive(Clone, Debug)]
pub struct DefaultTheory {
    pub rules: Vec<DefaultRule>,
    /// (default name, exception condition).
    pub exceptions: Vec<(String, Vec<Term>)>,
    pub facts: Program,
}

impl DefaultTheory {
    pub fn new(
        rules: Vec<DefaultRule>,
        exceptions: Vec<(String, Vec<Term>)>,
        facts: Program,
    ) -> Result<DefaultTheory, String> {
        let mut names = HashSet::new();
        for r in &rules {
            if !names.insert(r.name.clone()) {
                return Err(format!("duplicate default name {}", r.name));
            }
            match r.conclusion.functor() {
                Some(_) => {}
                None => return Err(format!("default conclusion must be an atom: {}", r.conclusion)),
            }
        }
        for (name, _) in &exceptions {
            if !names.contains(name) {
                return Err(format!("exception refers to unknown default {name}"));
            }
        }
        let t = DefaultTheory {
            rules,
            exceptions,
            facts,
        };
        t.check_stratified()?;
        Ok(t)
    }

    /// Rejects exception conditions that depend (through the facts
    /// program) on any default conclusion: exceptions must be decidable
    /// before the defaults fire.
    fn check_stratified(&self) -> Result<(), String> {
        let conclusion_preds: HashSet<(String, usize)> = self
            .rules
            .iter()
            .filter_map(|r| r.conclusion.functor().map(|(f, a)| (f.to_string(), a)))
            .collect();
        // predicate dependency edges of the facts program
        let mut deps: HashMap<(String, usize), HashSet<(String, usize)>> = HashMap::new();
        for c in self.facts.clauses() {
            let Some(h) = c.head.first().and_then(|h| h.functor()) else {
                continue;
            };
            let entry = deps.entry((h.0.to_string(), h.1)).or_default();
            for b in &c.body {
                if let Some((f, a)) = b.functor() {
                    entry.insert((f.to_string(), a));
                }
            }
        }
        for (name, cond) in &self.exceptions {
            let mut work: Vec<(String, usize)> = cond
                .iter()
                .filter_map(|t| t.functor().map(|(f, a)| (f.to_string(), a)))
                .collect();
            let mut seen: HashSet<(String, usize)> = HashSet::new();
            while let Some(p) = work.pop() {
                if !seen.insert(p.clone()) {
                    continue;
                }
                if conclusion_preds.contains(&p) {
                    return Err(format!(
                        "exception for {name} depends on default conclusion {}/{}",
                        p.0, p.1
                    ));
                }
                if let Some(next) = deps.get(&p) {
                    work.extend(next.iter().cloned());
                }
            }
        }
        Ok(())
    }

    /// Compiles the theory to a definite program with NAF: each default
    /// becomes `conclusion :- prerequisite, \+ exception-condition`.
    pub fn compile_to_naf(&self) -> Program {
        let mut p = self.facts.clone();
        for r in &self.rules {
            let mut body = r.prerequisite.clone();
            for (name, cond) in &self.exceptions {
                if name == &r.name {
                    for c in cond {
                        body.push(Term::comp("\\+", vec![c.clone()]));
                    }
                }
            }
            p.push(GeneralClause::new(vec![r.conclusion.clone()], body));
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefaultVerdict {
    /// Derivable through the named default.
    Holds { rule: String },
    /// A default applies but an exception fires.
    Blocked { rule: String, exception: Term },
    Underivable,
}

impl std::fmt::Display for DefaultVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DefaultVerdict::Holds { rule } => write!(f, "holds (by {rule})"),
            DefaultVerdict::Blocked { rule, exception } => write!(
                f,
                "blocked ({rule} barred by {})",
                write_term_default(exception)
            ),
            DefaultVerdict::Underivable => write!(f, "underivable"),
        }
    }
}

fn derivable(program: &Program, goal: &[Term], limits: EngineLimits) -> Vec<Subst> {
    sld::solve_all(
        program,
        goal,
        Strategy::DepthFirst,
        EngineLimits {
            max_depth: limits.max_depth.or(Some(64)),
            max_nodes: limits.max_nodes.or(Some(200_000)),
        },
        Flags {
            undefined_is_error: false,
            ..Flags::default()
        },
    )
    .map(|v| v.into_iter().map(|a| a.subst).collect())
    .unwrap_or_default()
}

/// Evaluates a ground query against a default theory by stratified
/// iteration: defaults fire when their prerequisite is derivable from
/// the facts plus previously established conclusions and no exception
/// condition is derivable.
pub fn default_conclusions(
    theory: &DefaultTheory,
    query: &Term,
    limits: EngineLimits,
) -> Result<DefaultVerdict, EngineError> {
    if !query.is_ground() {
        return Err(EngineError::Instantiation(format!(
            "default query must be ground: {query}"
        )));
    }
    let mut established = theory.facts.clone();
    let mut concluded: HashSet<Term> = HashSet::new();
    let mut blocked_for_query: Option<(String, Term)> = None;
    loop {
        let mut new_atoms: Vec<Term> = Vec::new();
        for rule in &theory.rules {
            for sol in derivable(&established, &rule.prerequisite, limits) {
                let conclusion = sol.apply(&rule.conclusion);
                if !conclusion.is_ground() || concluded.contains(&conclusion) {
                    continue;
                }
                // does an exception for this rule fire under this instance?
                let mut fired: Option<Term> = None;
                for (name, cond) in &theory.exceptions {
                    if name != &rule.name {
                        continue;
                    }
                    let cond_inst: Vec<Term> = cond.iter().map(|c| sol.apply(c)).collect();
                    if !derivable(&established, &cond_inst, limits).is_empty() {
                        fired = Some(if cond_inst.len() == 1 {
                            cond_inst.into_iter().next().unwrap()
                        } else {
                            Term::list(cond_inst)
                        });
                        break;
                    }
                }
                match fired {
                    Some(exc) => {
                        if conclusion == *query && blocked_for_query.is_none() {
                            blocked_for_query = Some((rule.name.clone(), exc));
                        }
                    }
                    None => {
                        if conclusion == *query {
                            return Ok(DefaultVerdict::Holds {
                                rule: rule.name.clone(),
                            });
                        }
                        new_atoms.push(conclusion);
                    }
                }
            }
        }
        let mut grew = false;
        for atom in new_atoms {
            if concluded.insert(atom.clone()) {
                established.push(GeneralClause::new(vec![atom], vec![]));
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    // already true in the facts alone?
    if !derivable(&theory.facts, std::slice::from_ref(query), limits).is_empty() {
        return Ok(DefaultVerdict::Holds {
            rule: "facts".to_string(),
        });
    }
    match blocked_for_query {
        Some((rule, exception)) => Ok(DefaultVerdict::Blocked { rule, exception }),
        None => Ok(DefaultVerdict::Underivable),
    }
}

// ---------------------------------------------------------------------
// programme-file loading

fn directive_body(sc: &SourceClause) -> Option<&Term> {
    match (&sc.kind, &sc.term) {
        (ClauseKind::Directive, Term::Compound(f, args)) if f == ":-" && args.len() == 1 => {
            Some(&args[0])
        }
        _ => None,
    }
}

/// Loads an abduction spec from programme text with directives
/// `:- abducible(p/1).` and `:- constraint(Body).`; everything else is
/// ordinary program text.
pub fn load_abduction_spec(src: &str) -> Result<AbductionSpec, String> {
    let parsed = parse_program(src);
    if let Some(e) = parsed.errors.first() {
        return Err(e.to_string());
    }
    let mut abducibles = Vec::new();
    let mut constraints = Vec::new();
    let mut rest = Vec::new();
    for sc in &parsed.clauses {
        let Some(body) = directive_body(sc) else {
            rest.push(sc.clone());
            continue;
        };
        match body {
            Term::Compound(f, args) if f == "abducible" && args.len() == 1 => {
                match &args[0] {
                    Term::Compound(slash, ia)
                        if slash == "/" && ia.len() == 2 =>
                    {
                        match (&ia[0], &ia[1]) {
                            (Term::Atom(name), Term::Int(n)) if *n >= 0 => {
                                abducibles.push((name.clone(), *n as usize));
                            }
                            _ => return Err(format!("bad abducible indicator: {}", args[0])),
                        }
                    }
                    other => return Err(format!("bad abducible indicator: {other}")),
                }
            }
            Term::Compound(f, args) if f == "constraint" && args.len() == 1 => {
                constraints.push(conjuncts(&args[0])?);
            }
            other => return Err(format!("unknown directive: {other}")),
        }
    }
    let program = sld::consult(&Program::new(), &rest).map_err(|e| e.to_string())?;
    AbductionSpec::new(program, abducibles, constraints)
}

/// Loads a default theory from programme text with directives
/// `:- default(name, Prereq => Conclusion).` and
/// `:- exception(name, Cond).`; everything else becomes facts.
pub fn load_default_theory(src: &str) -> Result<DefaultTheory, String> {
    let parsed = parse_program(src);
    if let Some(e) = parsed.errors.first() {
        return Err(e.to_string());
    }
    let mut rules = Vec::new();
    let mut exceptions = Vec::new();
    let mut rest = Vec::new();
    for sc in &parsed.clauses {
        let Some(body) = directive_body(sc) else {
            rest.push(sc.clone());
            continue;
        };
        match body {
            Term::Compound(f, args) if f == "default" && args.len() == 2 => {
                let Term::Atom(name) = &args[0] else {
                    return Err(format!("default name must be an atom: {}", args[0]));
                };
                let Term::Compound(arrow, parts) = &args[1] else {
                    return Err(format!("default needs Prereq => Conclusion: {}", args[1]));
                };
                if arrow != "=>" || parts.len() != 2 {
                    return Err(format!("default needs Prereq => Conclusion: {}", args[1]));
                }
                rules.push(DefaultRule {
                    name: name.clone(),
                    prerequisite: conjuncts(&parts[0])?,
                    conclusion: parts[1].clone(),
                });
            }
            Term::Compound(f, args) if f == "exception" && args.len() == 2 => {
                let Term::Atom(name) = &args[0] else {
                    return Err(format!("exception name must be an atom: {}", args[0]));
                };
                exceptions.push((name.clone(), conjuncts(&args[1])?));
            }
            other => return Err(format!("unknown directive: {other}")),
        }
    }
    let facts = sld::consult(&Program::new(), &rest).map_err(|e| e.to_string())?;
    DefaultTheory::new(rules, exceptions, facts)
}
