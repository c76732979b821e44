//! Inductive generalization: θ-subsumption as the generality order over
//! clauses, Plotkin least general generalization, and a minimal
//! bottom-up induction loop from positive and negative examples.

use crate::clausal::{GeneralClause, Program};
use crate::reader::{parse_program, ClauseKind, SourceClause};
use crate::sld::{self, EngineError, EngineLimits, Flags, Strategy};
use crate::term::{AntiUnifier, Subst, Term};
use std::collections::HashSet;

/// One-way matching: extends `subst` so that `pattern`·subst == `target`,
/// binding only the pattern's variables.
fn match_term(pattern: &Term, target: &Term, subst: &mut Subst) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) => match subst.get(v) {
            // An already-bound variable must map to exactly this target;
            // its image is a subterm of the target clause and is never
            // rebound.
            Some(bound) => bound == target,
            None => {
                subst.bind(v.clone(), target.clone());
                true
            }
        },
        (Term::Atom(a), Term::Atom(b)) => a == b,
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::Compound(f, xs), Term::Compound(g, ys)) if f == g && xs.len() == ys.len() => {
            xs.iter().zip(ys).all(|(x, y)| match_term(x, y, subst))
        }
        _ => false,
    }
}

/// θ-subsumption: a substitution θ with head(c)θ = head(d) and
/// body(c)θ ⊆ body(d) as literal sets, found by backtracking literal
/// matching; first-found θ wins.
pub fn theta_subsumes(c: &GeneralClause, d: &GeneralClause) -> Option<Subst> {
    // The clauses have independent variable scopes: rename c's variables
    // apart from d's so shared names cannot capture each other, then
    // translate the witness back to c's own names.
    let d_vars: HashSet<String> = d.variables().into_iter().collect();
    let mut prefix = "_Sub".to_string();
    while d_vars.iter().any(|v| v.starts_with(&prefix)) {
        prefix.push('_');
    }
    let c_vars = c.variables();
    let mut ren = Subst::new();
    for v in &c_vars {
        ren.bind(v.clone(), Term::var(format!("{prefix}{v}")));
    }
    let c = c.apply(&ren);
    let theta = theta_subsumes_raw(&c, d)?;
    let mut out = Subst::new();
    for v in &c_vars {
        if let Some(image) = theta.get(&format!("{prefix}{v}")) {
            out.bind(v.clone(), image.clone());
        }
    }
    Some(out)
}

fn theta_subsumes_raw(c: &GeneralClause, d: &GeneralClause) -> Option<Subst> {
    let (ch, dh) = (c.head.first()?, d.head.first()?);
    let mut theta = Subst::new();
    if !match_term(ch, dh, &mut theta) {
        return None;
    }
    fn cover(body: &[Term], candidates: &[Term], theta: &Subst) -> Option<Subst> {
        let Some(lit) = body.first() else {
            return Some(theta.clone());
        };
        for target in candidates {
            let mut extended = theta.clone();
            if match_term(lit, target, &mut extended) {
                if let Some(done) = cover(&body[1..], candidates, &extended) {
                    return Some(done);
                }
            }
        }
        None
    }
    cover(&c.body, &d.body, &theta)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Generality {
    MoreGeneral,
    MoreSpecific,
    Equivalent,
    Incomparable,
}

impl std::fmt::Display for Generality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Generality::MoreGeneral => write!(f, "more-general"),
            Generality::MoreSpecific => write!(f, "more-specific"),
            Generality::Equivalent => write!(f, "equivalent"),
            Generality::Incomparable => write!(f, "incomparable"),
        }
    }
}

pub fn generality_check(c: &GeneralClause, d: &GeneralClause) -> Generality {
    match (theta_subsumes(c, d).is_some(), theta_subsumes(d, c).is_some()) {
        (true, true) => Generality::Equivalent,
        (true, false) => Generality::MoreGeneral,
        (false, true) => Generality::MoreSpecific,
        (false, false) => Generality::Incomparable,
    }
}

/// Drops body literals that are redundant under θ-subsumption, keeping
/// the clause equivalent.
pub fn reduce_clause(c: &GeneralClause) -> GeneralClause {
    let mut current = c.clone();
    loop {
        let mut reduced = None;
        for i in 0..current.body.len() {
            let mut body = current.body.clone();
            body.remove(i);
            let candidate = GeneralClause::new(current.head.clone(), body);
            // the smaller clause trivially subsumes the larger; the
            // literal is redundant when the converse also holds
            if theta_subsumes(&current, &candidate).is_some() {
                reduced = Some(candidate);
                break;
            }
        }
        match reduced {
            Some(next) => current = next,
            None => return current,
        }
    }
}

/// Plotkin lgg of two definite clauses with compatible heads: heads are
/// anti-unified, bodies take every pairwise anti-unification of literals
/// with matching predicate, all sharing one disagreement map; a
/// reduction pass removes subsumption-redundant body literals.
pub fn lgg_clauses(c1: &GeneralClause, c2: &GeneralClause) -> Result<GeneralClause, String> {
    let (h1, h2) = match (c1.head.first(), c2.head.first()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err("lgg requires clauses with heads".to_string()),
    };
    if h1.functor() != h2.functor() {
        return Err(format!(
            "incompatible heads: {h1} vs {h2}"
        ));
    }
    let mut au = AntiUnifier::new();
    let head = au.generalize(h1, h2);
    let mut body = Vec::new();
    for b1 in &c1.body {
        for b2 in &c2.body {
            if b1.functor() == b2.functor() && b1.functor().is_some() {
                let g = au.generalize(b1, b2);
                if !body.contains(&g) {
                    body.push(g);
                }
            }
        }
    }
    Ok(reduce_clause(&GeneralClause::new(vec![head], body)))
}

#[derive(Clone, Copy, Debug)]
pub struct InduceBounds {
    pub max_body: usize,
    pub max_clauses: usize,
}

impl Default for InduceBounds {
    fn default() -> InduceBounds {
        InduceBounds {
            max_body: 6,
            max_clauses: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ILPTask {
    pub positives: Vec<Term>,
    pub negatives: Vec<Term>,
    pub background: Program,
    pub target: (String, usize),
    pub bounds: InduceBounds,
}

impl ILPTask {
    pub fn new(
        positives: Vec<Term>,
        negatives: Vec<Term>,
        background: Program,
        bounds: InduceBounds,
    ) -> Result<ILPTask, String> {
        let pos_set: HashSet<&Term> = positives.iter().collect();
        if negatives.iter().any(|n| pos_set.contains(n)) {
            return Err("positive and negative examples overlap".to_string());
        }
        let mut targets: HashSet<(String, usize)> = HashSet::new();
        for e in positives.iter().chain(&negatives) {
            match e.functor() {
                Some((f, a)) if e.is_ground() => {
                    targets.insert((f.to_string(), a));
                }
                _ => return Err(format!("examples must be ground atoms: {e}")),
            }
        }
        if targets.len() != 1 {
            return Err(format!(
                "examples must share one target predicate, found {}",
                targets.len()
            ));
        }
        let target = targets.into_iter().next().unwrap();
        if background.defines(&target.0, target.1) {
            return Err(format!(
                "target {}/{} is already defined in the background",
                target.0, target.1
            ));
        }
        Ok(ILPTask {
            positives,
            negatives,
            background,
            target,
            bounds,
        })
    }
}

fn constants_of(t: &Term, out: &mut HashSet<String>) {
    match t {
        Term::Atom(a) => {
            out.insert(a.clone());
        }
        Term::Int(n) => {
            out.insert(n.to_string());
        }
        Term::Compound(_, args) => {
            for a in args {
                constants_of(a, out);
            }
        }
        Term::Var(_) => {}
    }
}

/// Builds the ground starting clause for a positive example: head = the
/// example, body = background facts sharing a constant with it, up to
/// `max_body` literals.
fn saturate(example: &Term, background: &Program, max_body: usize) -> GeneralClause {
    let mut head_consts = HashSet::new();
    constants_of(example, &mut head_consts);
    let mut body = Vec::new();
    for clause in background.clauses() {
        if !clause.body.is_empty() || clause.head.len() != 1 {
            continue;
        }
        let fact = &clause.head[0];
        if !fact.is_ground() {
            continue;
        }
        let mut fact_consts = HashSet::new();
        constants_of(fact, &mut fact_consts);
        if head_consts.intersection(&fact_consts).next().is_some() {
            if body.len() < max_body {
                body.push(fact.clone());
            }
        }
    }
    GeneralClause::new(vec![example.clone()], body)
}

fn covers(
    hypothesis: &[GeneralClause],
    background: &Program,
    example: &Term,
    limits: EngineLimits,
) -> bool {
    let mut program = background.clone();
    for c in hypothesis {
        program.push(c.clone());
    }
    sld::solve_all(
        &program,
        std::slice::from_ref(example),
        Strategy::DepthFirst,
        EngineLimits {
            max_depth: limits.max_depth.or(Some(32)),
            max_nodes: limits.max_nodes.or(Some(100_000)),
        },
        Flags {
            undefined_is_error: false,
            ..Flags::default()
        },
    )
    .map(|v| !v.is_empty())
    .unwrap_or(false)
}

fn consistent(
    hypothesis: &[GeneralClause],
    task: &ILPTask,
    limits: EngineLimits,
) -> bool {
    task.negatives
        .iter()
        .all(|n| !covers(hypothesis, &task.background, n, limits))
}

/// Bottom-up induction: saturates each positive example into a ground
/// clause, then greedily folds adjacent clauses by lgg as long as no
/// negative example becomes derivable. Returns a hypothesis covering
/// every positive and no negative, or `None` if the bounds preclude one.
/// When negatives are empty and nothing forces generalization, the most
/// specific consistent clauses are kept.
pub fn induce(task: &ILPTask, limits: EngineLimits) -> Result<Option<Program>, EngineError> {
    let mut clauses: Vec<GeneralClause> = task
        .positives
        .iter()
        .map(|e| saturate(e, &task.background, task.bounds.max_body))
        .collect();
    if clauses.is_empty() {
        return Ok(Some(Program::new()));
    }
    // greedy fold pass: positives in input order, fold adjacent,
    // re-test against the negatives after each fold
    let mut changed = true;
    while changed {
        changed = false;
        let mut i = 0;
        while i + 1 < clauses.len() {
            let folded = match lgg_clauses(&clauses[i], &clauses[i + 1]) {
                Ok(c) if c.body.len() <= task.bounds.max_body => c,
                _ => {
                    i += 1;
                    continue;
                }
            };
            let mut candidate = clauses.clone();
            candidate.remove(i + 1);
            candidate[i] = folded;
            if consistent(&candidate, task, limits) {
                clauses = candidate;
                changed = true;
            } else {
                i += 1;
            }
        }
    }
    // drop clauses subsumed by another (keeps the hypothesis small)
    let mut kept: Vec<GeneralClause> = Vec::new();
    for c in &clauses {
        if !kept.iter().any(|k| theta_subsumes(k, c).is_some())
            && !clauses
                .iter()
                .filter(|o| *o != c)
                .any(|o| theta_subsumes(o, c).is_some() && theta_subsumes(c, o).is_none())
        {
            kept.push(c.clone());
        }
    }
    if kept.len() > task.bounds.max_clauses {
        return Ok(None);
    }
    let all_pos = task
        .positives
        .iter()
        .all(|p| covers(&kept, &task.background, p, limits));
    if !all_pos || !consistent(&kept, task, limits) {
        return Ok(None);
    }
    let mut hypothesis = Program::new();
    for c in kept {
        hypothesis.push(c);
    }
    Ok(Some(hypothesis))
}

/// Loads an ILP task from programme text: `:- pos(Atom).` and
/// `:- neg(Atom).` directives give the examples, everything else is
/// background knowledge.
pub fn load_ilp_task(src: &str, bounds: InduceBounds) -> Result<ILPTask, String> {
    let parsed = parse_program(src);
    if let Some(e) = parsed.errors.first() {
        return Err(e.to_string());
    }
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    let mut rest: Vec<SourceClause> = Vec::new();
    for sc in &parsed.clauses {
        let directive = match (&sc.kind, &sc.term) {
            (ClauseKind::Directive, Term::Compound(f, args)) if f == ":-" && args.len() == 1 => {
                Some(&args[0])
            }
            _ => None,
        };
        match directive {
            Some(Term::Compound(f, args)) if f == "pos" && args.len() == 1 => {
                positives.push(args[0].clone());
            }
            Some(Term::Compound(f, args)) if f == "neg" && args.len() == 1 => {
                negatives.push(args[0].clone());
            }
            Some(other) => return Err(format!("unknown directive: {other}")),
            None => rest.push(sc.clone()),
        }
    }
    let background = sld::consult(&Program::new(), &rest).map_err(|e| e.to_string())?;
    ILPTask::new(positives, negatives, background, bounds)
}
