//! Acceptance suite: each test checks one criterion against an
//! independent oracle and prints a single pass/fail line. The final
//! criterion (golden end-to-end sessions) lives in tests/golden.rs.

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplylog::clausal::{self, RefuteOutcome};
use simplylog::fol::{self, Formula, SkolemSupply};
use simplylog::induce::{self, InduceBounds};
use simplylog::lang::{self, GrammarRule};
use simplylog::reader;
use simplylog::reason::{self, DefaultVerdict, Explanation};
use simplylog::search::{
    best_first, uninformed_search, BestFirstKind, GraphProblem, SearchOptions, UninformedKind,
};
use simplylog::sld::{self, EngineError, EngineLimits, Flags, Strategy};
use simplylog::term::unify;
use simplylog::{GeneralClause, Program, Subst, Term};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

fn report(num: u32, name: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("acceptance {num:02} {name}: pass");
    } else {
        println!("acceptance {num:02} {name}: FAIL");
        panic!(
            "{name}: {} violation(s); first: {}",
            failures.len(),
            failures[0]
        );
    }
}

fn quiet_flags() -> Flags {
    Flags {
        occurs_check: true,
        undefined_is_error: false,
    }
}

// ---------------------------------------------------------------------
// 1. Unification invariants on generated term pairs.

fn random_term(rng: &mut ChaCha8Rng, depth: u32, vars: &[&str]) -> Term {
    if depth == 0 || rng.gen_bool(0.45) {
        if !vars.is_empty() && rng.gen_bool(0.5) {
            Term::var(vars[rng.gen_range(0..vars.len())])
        } else if rng.gen_bool(0.5) {
            Term::atom("a")
        } else {
            Term::atom("b")
        }
    } else if rng.gen_bool(0.5) {
        Term::comp("f", vec![random_term(rng, depth - 1, vars)])
    } else {
        Term::comp(
            "g",
            vec![
                random_term(rng, depth - 1, vars),
                random_term(rng, depth - 1, vars),
            ],
        )
    }
}

/// Replaces random subterms of a ground term by variables from `pool`,
/// consistently: the same variable always stands for the same subterm.
fn abstraction(
    rng: &mut ChaCha8Rng,
    ground: &Term,
    pool: &[&str],
    map: &mut BTreeMap<String, Term>,
) -> Term {
    if rng.gen_bool(0.3) {
        let v = pool[rng.gen_range(0..pool.len())];
        match map.get(v) {
            None => {
                map.insert(v.to_string(), ground.clone());
                return Term::var(v);
            }
            Some(bound) if bound == ground => return Term::var(v),
            Some(_) => {}
        }
    }
    match ground {
        Term::Compound(f, args) => Term::comp(
            f.clone(),
            args.iter()
                .map(|a| abstraction(rng, a, pool, map))
                .collect(),
        ),
        leaf => leaf.clone(),
    }
}

#[test]
fn criterion_01_unification_invariants() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let s = random_term(&mut rng, 3, &["X", "Y", "Z"]);
        let t = random_term(&mut rng, 3, &["X", "Y", "Z"]);
        match unify(&s, &t, true) {
            Some(mu) => {
                let us = mu.apply(&s);
                if mu.apply(&t) != us {
                    failures.push(format!("case {case}: mgu does not unify {s} and {t}"));
                }
                if mu.apply(&us) != us {
                    failures.push(format!("case {case}: non-idempotent mgu for {s}, {t}"));
                }
                match unify(&t, &s, true) {
                    Some(mu2) => {
                        if !is_variant(&us, &mu2.apply(&t)) {
                            failures.push(format!(
                                "case {case}: asymmetric mgu for {s}, {t}: {us} vs {}",
                                mu2.apply(&t)
                            ));
                        }
                    }
                    None => failures.push(format!("case {case}: unify({t}, {s}) failed")),
                }
            }
            None => {
                if unify(&t, &s, true).is_some() {
                    failures.push(format!("case {case}: unify succeeds only flipped: {s}, {t}"));
                }
            }
        }
        // Ground-witness factoring: two abstractions of the same ground
        // term must unify, and the unified term must still generalize it.
        let ground = {
            let g = random_term(&mut rng, 3, &[]);
            g
        };
        let s2 = abstraction(&mut rng, &ground, &["X", "Y", "Z"], &mut BTreeMap::new());
        let t2 = abstraction(&mut rng, &ground, &["U", "V", "W"], &mut BTreeMap::new());
        match unify(&s2, &t2, true) {
            Some(mu) => {
                let unified = mu.apply(&s2);
                if !oracle_match(&unified, &ground, &mut BTreeMap::new()) {
                    failures.push(format!(
                        "case {case}: {unified} does not generalize witness {ground}"
                    ));
                }
            }
            None => failures.push(format!(
                "case {case}: abstractions {s2}, {t2} of {ground} do not unify"
            )),
        }
    }
    assert!(start.elapsed().as_secs() < 10, "unification suite too slow");
    report(1, "unification-invariants", &failures);
}

// ---------------------------------------------------------------------
// 2. Least Herbrand model vs brute-force minimal-model intersection.

#[test]
fn criterion_02_model_fixpoint_oracle() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut failures = Vec::new();
    for case in 0..200 {
        let n = rng.gen_range(1..=12usize);
        let m = rng.gen_range(1..=2 * n);
        let mut prop: Vec<PropClause> = Vec::new();
        for _ in 0..m {
            let head = rng.gen_range(0..n);
            let body: Vec<usize> = (0..rng.gen_range(0..=3))
                .map(|_| rng.gen_range(0..n))
                .collect();
            prop.push((vec![head], body));
        }
        let atom = |i: usize| Term::atom(format!("q{i}"));
        let mut p = Program::new();
        for (head, body) in &prop {
            p.push(GeneralClause::new(
                vec![atom(head[0])],
                body.iter().map(|&i| atom(i)).collect(),
            ));
        }
        let lm = clausal::least_herbrand_model(&p, 1, 10_000).expect("fixpoint failed");
        assert!(!lm.partial, "fixpoint ran out of fuel");
        let oracle_mask =
            minimal_model_intersection(&prop, n).expect("definite sets are satisfiable");
        let oracle: BTreeSet<Term> = (0..n)
            .filter(|i| {
                // Only atoms that occur in the program are in its base.
                oracle_mask & (1 << i) != 0
            })
            .map(atom)
            .collect();
        let got: BTreeSet<Term> = lm.model.true_atoms.iter().cloned().collect();
        if got != oracle {
            failures.push(format!("case {case}: model {got:?} != oracle {oracle:?}"));
        }
    }
    assert!(start.elapsed().as_secs() < 30, "model suite too slow");
    report(2, "model-fixpoint-oracle", &failures);
}

// ---------------------------------------------------------------------
// 3. Resolution refutation iff truth-table unsatisfiability.

#[test]
fn criterion_03_refutation_iff_unsat() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut failures = Vec::new();
    for case in 0..200 {
        let n = rng.gen_range(1..=8usize);
        let m = rng.gen_range(2..=n + 3);
        let mut prop: Vec<PropClause> = Vec::new();
        while prop.len() < m {
            let pos: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.2)).collect();
            let neg: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.2)).collect();
            if pos.is_empty() && neg.is_empty() {
                continue;
            }
            prop.push((pos, neg));
        }
        let atom = |i: usize| Term::atom(format!("q{i}"));
        let clauses: Vec<GeneralClause> = prop
            .iter()
            .map(|(pos, neg)| {
                GeneralClause::new(
                    pos.iter().map(|&i| atom(i)).collect(),
                    neg.iter().map(|&i| atom(i)).collect(),
                )
            })
            .collect();
        let sat = !prop_models(&prop, n).is_empty();
        let result = clausal::resolution_refute(&clauses, 500_000);
        match result.outcome {
            RefuteOutcome::Refuted(_) if sat => {
                failures.push(format!("case {case}: refuted a satisfiable set"));
            }
            RefuteOutcome::Saturated if !sat => {
                failures.push(format!("case {case}: saturated on an unsatisfiable set"));
            }
            RefuteOutcome::Budget => {
                failures.push(format!("case {case}: budget exhausted"));
            }
            _ => {}
        }
        // Replay: every step is semantically entailed by its parents and
        // the final resolvent is the empty clause.
        if let Some(refutation) = &result.refutation {
            let mut all: Vec<&GeneralClause> = refutation.inputs.iter().collect();
            let to_prop = |c: &GeneralClause| -> PropClause {
                let idx = |t: &Term| match t {
                    Term::Atom(a) => a[1..].parse::<usize>().unwrap(),
                    _ => panic!("non-propositional atom {t}"),
                };
                (
                    c.head.iter().map(idx).collect(),
                    c.body.iter().map(idx).collect(),
                )
            };
            for (k, step) in refutation.steps.iter().enumerate() {
                let (i, j) = step.parents;
                if i >= all.len() || j >= all.len() {
                    failures.push(format!("case {case}: step {k} has bad parents"));
                    break;
                }
                let (pa, pb) = (to_prop(all[i]), to_prop(all[j]));
                let res = to_prop(&step.resolvent_clause);
                let entailed = (0u32..1 << n).all(|mask| {
                    !(prop_clause_true(&pa, mask) && prop_clause_true(&pb, mask))
                        || prop_clause_true(&res, mask)
                });
                if !entailed {
                    failures.push(format!("case {case}: step {k} is not entailed"));
                }
                all.push(&step.resolvent_clause);
            }
            let last = refutation.steps.last().expect("empty refutation");
            if !(last.resolvent_clause.head.is_empty() && last.resolvent_clause.body.is_empty()) {
                failures.push(format!("case {case}: refutation does not end in []"));
            }
            if sat {
                failures.push(format!("case {case}: refutation for satisfiable set"));
            }
        } else if !sat && matches!(result.outcome, RefuteOutcome::Refuted(_)) {
            failures.push(format!("case {case}: refuted without a refutation object"));
        }
    }
    assert!(start.elapsed().as_secs() < 60, "refutation suite too slow");
    report(3, "refutation-iff-unsat", &failures);
}

// ---------------------------------------------------------------------
// 4. SLD strategy agreement on non-recursive programs, plus the
// left-recursive program that separates the strategies.

#[test]
fn criterion_04_sld_strategy_agreement() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut failures = Vec::new();
    let consts = ["a", "b", "c"];
    for case in 0..100 {
        // Layered unary predicates: bodies only call lower layers, so the
        // program is non-recursive and every derivation is finite.
        let levels = rng.gen_range(2..=3usize);
        let mut p = Program::new();
        for level in 0..levels {
            let pred = |arg: Term| Term::comp(format!("p{level}"), vec![arg]);
            let n_clauses = rng.gen_range(1..=2usize);
            for _ in 0..n_clauses {
                if level == 0 {
                    p.push(GeneralClause::new(
                        vec![pred(Term::atom(consts[rng.gen_range(0..3)]))],
                        vec![],
                    ));
                    continue;
                }
                let headvar = rng.gen_bool(0.6);
                let head = if headvar {
                    pred(Term::var("X"))
                } else {
                    pred(Term::atom(consts[rng.gen_range(0..3)]))
                };
                let mut body = Vec::new();
                for b in 0..rng.gen_range(1..=2usize) {
                    let lower = rng.gen_range(0..level);
                    // When the head has a variable, the first body atom
                    // pins it so answers come out ground.
                    let arg = if headvar && b == 0 {
                        Term::var("X")
                    } else if rng.gen_bool(0.5) {
                        Term::var("X")
                    } else {
                        Term::atom(consts[rng.gen_range(0..3)])
                    };
                    body.push(Term::comp(format!("p{lower}"), vec![arg]));
                }
                p.push(GeneralClause::new(vec![head], body));
            }
        }
        // Grounding oracle: instantiate X by every constant and forward
        // chain to the set of derivable ground atoms.
        let mut ground_clauses: Vec<(Term, Vec<Term>)> = Vec::new();
        for c in p.clauses() {
            if c.variables().is_empty() {
                ground_clauses.push((c.head[0].clone(), c.body.clone()));
            } else {
                for k in &consts {
                    let mut s = Subst::new();
                    s.bind("X".to_string(), Term::atom(*k));
                    ground_clauses.push((
                        s.apply(&c.head[0]),
                        c.body.iter().map(|b| s.apply(b)).collect(),
                    ));
                }
            }
        }
        let mut truths: HashSet<Term> = HashSet::new();
        loop {
            let before = truths.len();
            for (h, b) in &ground_clauses {
                if b.iter().all(|x| truths.contains(x)) {
                    truths.insert(h.clone());
                }
            }
            if truths.len() == before {
                break;
            }
        }
        let top = levels - 1;
        let query = Term::comp(format!("p{top}"), vec![Term::var("Q")]);
        let oracle: BTreeSet<Term> = consts
            .iter()
            .map(|k| Term::comp(format!("p{top}"), vec![Term::atom(*k)]))
            .filter(|a| truths.contains(a))
            .collect();
        for strategy in [Strategy::DepthFirst, Strategy::BreadthFirst] {
            let answers = sld::solve_all(
                &p,
                std::slice::from_ref(&query),
                strategy,
                EngineLimits::none(),
                quiet_flags(),
            )
            .expect("strategy run failed");
            let got: BTreeSet<Term> = answers.iter().map(|a| a.subst.apply(&query)).collect();
            if got != oracle {
                failures.push(format!(
                    "case {case} {strategy:?}: answers {got:?} != grounding {oracle:?}"
                ));
            }
        }
    }
    // The classic separator: with the looping clause first, depth-first
    // exploration diverges while breadth-first and iterative deepening
    // still find the answer.
    let p = {
        let mut p = Program::new();
        p.push(GeneralClause::new(
            vec![Term::atom("p")],
            vec![Term::atom("p")],
        ));
        p.push(GeneralClause::new(vec![Term::atom("p")], vec![]));
        p
    };
    let goal = [Term::atom("p")];
    // The engine snapshots the goal list per explored alternative, so a
    // diverging depth-first descent costs quadratic memory; a small node
    // budget is plenty to witness the divergence.
    let limits = EngineLimits::nodes(1_000);
    let mut supply = simplylog::VarSupply::new();
    let mut dfs = sld::solve(&p, &goal, Strategy::DepthFirst, limits, quiet_flags(), &mut supply)
        .expect("dfs start");
    if !matches!(dfs.next(), Some(Err(EngineError::ResourcesExhausted))) {
        failures.push("separator: depth-first should exhaust resources".into());
    }
    for strategy in [Strategy::BreadthFirst, Strategy::IterativeDeepening { step: 1 }] {
        let mut supply = simplylog::VarSupply::new();
        let mut solver =
            sld::solve(&p, &goal, strategy, limits, quiet_flags(), &mut supply).expect("start");
        if !matches!(solver.next(), Some(Ok(_))) {
            failures.push(format!("separator: {strategy:?} should find the answer"));
        }
    }
    assert!(start.elapsed().as_secs() < 30, "sld suite too slow");
    report(4, "sld-strategy-agreement", &failures);
}

// ---------------------------------------------------------------------
// 5. A* optimality against a shortest-path oracle; breadth-first path
// length; inflated-heuristic regression witness.

#[test]
fn criterion_05_search_optimality() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut failures = Vec::new();
    for case in 0..200 {
        let n = rng.gen_range(2..=50usize);
        let name = |i: usize| format!("n{i}");
        let mut edges: HashMap<String, Vec<(String, i64)>> = HashMap::new();
        let mut reverse: HashMap<String, Vec<(String, i64)>> = HashMap::new();
        for i in 0..n {
            for _ in 0..rng.gen_range(0..=3) {
                let j = rng.gen_range(0..n);
                let w = rng.gen_range(1..=9i64);
                edges.entry(name(i)).or_default().push((name(j), w));
                reverse.entry(name(j)).or_default().push((name(i), w));
            }
        }
        let goal = name(rng.gen_range(0..n));
        let dist = dijkstra(&edges, "n0");
        let to_goal = dijkstra(&reverse, &goal);
        // Admissible heuristic: a random fraction of the true remaining
        // cost (zero where the goal is unreachable).
        let pct = rng.gen_range(0..=100i64);
        let heuristics: HashMap<String, i64> = (0..n)
            .map(|i| {
                let v = to_goal.get(&name(i)).map_or(0, |d| d * pct / 100);
                (name(i), v)
            })
            .collect();
        let gp = GraphProblem {
            start: name(0),
            goals: HashSet::from([goal.clone()]),
            edges: edges.clone(),
            heuristics,
        };
        let astar = best_first(&gp, BestFirstKind::AStar, SearchOptions::default());
        match (astar.found(), dist.get(&goal)) {
            (Some((path, cost)), Some(&d)) => {
                if cost != d {
                    failures.push(format!("case {case}: A* cost {cost} != oracle {d}"));
                }
                if path.first().map(String::as_str) != Some("n0")
                    || path.last() != Some(&goal)
                    || path.windows(2).any(|w| {
                        !edges
                            .get(&w[0])
                            .into_iter()
                            .flatten()
                            .any(|(v, _)| *v == w[1])
                    })
                {
                    failures.push(format!("case {case}: A* path is not a real path"));
                }
            }
            (None, None) => {}
            (found, oracle) => failures.push(format!(
                "case {case}: A* reachability {} != oracle {}",
                found.is_some(),
                oracle.is_some()
            )),
        }
        let bfs = uninformed_search(&gp, UninformedKind::BreadthFirst, SearchOptions::default());
        let hops = bfs_hops(&edges, "n0");
        match (bfs.found(), hops.get(&goal)) {
            (Some((path, _)), Some(&h)) => {
                if path.len() - 1 != h {
                    failures.push(format!(
                        "case {case}: BFS hops {} != oracle {h}",
                        path.len() - 1
                    ));
                }
            }
            (None, None) => {}
            (found, oracle) => failures.push(format!(
                "case {case}: BFS reachability {} != oracle {}",
                found.is_some(),
                oracle.is_some()
            )),
        }
    }
    // Regression witness: an inflated (inadmissible) heuristic lures A*
    // into the direct edge even though the detour is cheaper.
    let edges = HashMap::from([
        ("s".to_string(), vec![("a".to_string(), 1), ("g".to_string(), 3)]),
        ("a".to_string(), vec![("g".to_string(), 1)]),
    ]);
    let witness = |ha: i64| GraphProblem {
        start: "s".into(),
        goals: HashSet::from(["g".to_string()]),
        edges: edges.clone(),
        heuristics: HashMap::from([
            ("s".to_string(), 0),
            ("a".to_string(), ha),
            ("g".to_string(), 0),
        ]),
    };
    let inflated = best_first(&witness(10), BestFirstKind::AStar, SearchOptions::default());
    let admissible = best_first(&witness(1), BestFirstKind::AStar, SearchOptions::default());
    match (inflated.found(), admissible.found()) {
        (Some((_, 3)), Some((_, 2))) => {}
        other => failures.push(format!(
            "inflated-h witness: expected costs 3 and 2, got {:?}",
            (other.0.map(|x| x.1), other.1.map(|x| x.1))
        )),
    }
    assert!(start.elapsed().as_secs() < 30, "search suite too slow");
    report(5, "search-optimality", &failures);
}

// ---------------------------------------------------------------------
// 6. Clausal-form transformation preserves satisfiability over small
// finite domains.

fn random_fo_term(rng: &mut ChaCha8Rng) -> Term {
    match rng.gen_range(0..4) {
        0 => Term::var("x"),
        1 => Term::var("y"),
        2 => Term::atom("a"),
        _ => Term::atom("b"),
    }
}

fn random_formula(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let p = if rng.gen_bool(0.5) { "p" } else { "q" };
        return Formula::Atom(Term::comp(p, vec![random_fo_term(rng)]));
    }
    match rng.gen_range(0..7) {
        0 => Formula::not(random_formula(rng, depth - 1)),
        1 => Formula::and(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        2 => Formula::or(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        3 => Formula::implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        4 => Formula::iff(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        5 => {
            let v = if rng.gen_bool(0.5) { "x" } else { "y" };
            Formula::forall(v, random_formula(rng, depth - 1))
        }
        _ => {
            let v = if rng.gen_bool(0.5) { "x" } else { "y" };
            Formula::exists(v, random_formula(rng, depth - 1))
        }
    }
}

fn close_universally(f: Formula) -> Formula {
    let free = f.free_variables();
    free.into_iter().rev().fold(f, |acc, v| Formula::forall(v, acc))
}

#[test]
fn criterion_06_transform_equisatisfiability() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut failures = Vec::new();
    let mut done = 0;
    while done < 100 {
        let f = close_universally(random_formula(&mut rng, 3));
        let mut supply = SkolemSupply::new();
        let clauses = fol::to_clausal_form(&f, &mut supply);
        let mut sig_f = FoSignature::default();
        formula_signature(&f, &mut sig_f);
        let mut sig_c = sig_f.clone();
        for c in &clauses {
            clause_signature(c, &mut sig_c);
        }
        // Skolem functions of higher arity can make enumeration explode;
        // resample rather than wait.
        if interp_count(&sig_c, 3) > 300_000.0 {
            continue;
        }
        done += 1;
        for d in 1..=3usize {
            let sat_f = any_interp(&sig_f, d, &mut |i| {
                eval_formula(&f, &mut HashMap::new(), i)
            });
            let sat_c = any_interp(&sig_c, d, &mut |i| {
                clauses.iter().all(|c| eval_clause(c, i))
            });
            if sat_f != sat_c {
                failures.push(format!(
                    "formula {done} domain {d}: original sat={sat_f} clauses sat={sat_c} ({f:?})"
                ));
            }
        }
    }
    assert!(start.elapsed().as_secs() < 60, "transform suite too slow");
    report(6, "transform-equisatisfiability", &failures);
}

// ---------------------------------------------------------------------
// 7. Negation as failure agrees with the predicate completion.

#[test]
fn criterion_07_completion_naf_agreement() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = Vec::new();
    for case in 0..50 {
        let n = rng.gen_range(2..=10usize);
        let atom = |i: usize| Term::atom(format!("q{i}"));
        let mut p = Program::new();
        for i in 0..n {
            for _ in 0..rng.gen_range(0..=2usize) {
                if i == 0 || rng.gen_bool(0.3) {
                    p.push(GeneralClause::new(vec![atom(i)], vec![]));
                    continue;
                }
                // Stratified: bodies refer only to strictly lower atoms,
                // positively or through negation as failure.
                let body: Vec<Term> = (0..rng.gen_range(1..=2usize))
                    .map(|_| {
                        let j = rng.gen_range(0..i);
                        if rng.gen_bool(0.4) {
                            Term::comp("\\+", vec![atom(j)])
                        } else {
                            atom(j)
                        }
                    })
                    .collect();
                p.push(GeneralClause::new(vec![atom(i)], body));
            }
        }
        if p.len() == 0 {
            continue;
        }
        let completion = fol::predicate_completion(&p).expect("completion failed");
        // The program is function-free and non-recursive, so the
        // completion pins every atom: it has exactly one model.
        let mut sig = FoSignature::default();
        for def in &completion.definitions {
            formula_signature(def, &mut sig);
        }
        let mut models: Vec<BTreeSet<String>> = Vec::new();
        any_interp(&sig, 1, &mut |interp| {
            if completion
                .definitions
                .iter()
                .all(|d| eval_formula(d, &mut HashMap::new(), interp))
            {
                models.push(
                    interp
                        .predicates
                        .iter()
                        .filter(|(_, table)| table[0])
                        .map(|((name, _), _)| name.clone())
                        .collect(),
                );
            }
            false
        });
        if models.len() != 1 {
            failures.push(format!("case {case}: completion has {} models", models.len()));
            continue;
        }
        let model = &models[0];
        for (name, _) in sig.predicates.iter() {
            let truth = model.contains(name);
            let answers = sld::solve_all(
                &p,
                &[Term::atom(name.clone())],
                Strategy::DepthFirst,
                EngineLimits::none(),
                quiet_flags(),
            )
            .expect("query failed");
            if answers.is_empty() == truth {
                failures.push(format!(
                    "case {case}: {name} is {truth} in the completion but the engine disagrees"
                ));
            }
        }
    }
    assert!(start.elapsed().as_secs() < 60, "completion suite too slow");
    report(7, "completion-naf-agreement", &failures);
}

// ---------------------------------------------------------------------
// 8. DCG parsing matches a recursive-descent derivation oracle on every
// sentence up to length 6; generation round-trips.

fn load_grammar(rel: &str) -> Vec<GrammarRule> {
    let text = std::fs::read_to_string(corpus_path(rel)).expect("grammar file");
    let parsed = reader::parse_program(&text);
    assert!(parsed.errors.is_empty(), "parse errors in {rel}");
    parsed
        .clauses
        .iter()
        .map(|sc| GrammarRule::from_term(&sc.term).expect("grammar rule"))
        .collect()
}

#[test]
fn criterion_08_dcg_oracle() {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    let cases: Vec<(&str, Term)> = vec![
        ("ch7/grammar.pl", Term::atom("sentence")),
        ("ch7/semantics.pl", Term::comp("statement", vec![Term::var("M")])),
    ];
    for (file, nt) in cases {
        let rules = load_grammar(file);
        let lexicon = grammar_lexicon(&rules);
        let name = match &nt {
            Term::Atom(a) => a.clone(),
            Term::Compound(f, _) => f.clone(),
            _ => unreachable!(),
        };
        let mut accepted: BTreeSet<Vec<String>> = BTreeSet::new();
        for sentence in all_sentences(&lexicon, 6) {
            let oracle = count_derivations(&rules, &name, &sentence);
            let parses = lang::parse(&rules, &nt, &sentence, EngineLimits::none())
                .expect("parse failed");
            if parses.len() != oracle {
                failures.push(format!(
                    "{file}: {sentence:?} has {} parses, oracle says {oracle}",
                    parses.len()
                ));
            }
            if oracle > 0 {
                accepted.insert(sentence);
            }
        }
        let generated: BTreeSet<Vec<String>> =
            lang::generate(&rules, &nt, 6).into_iter().collect();
        if generated != accepted {
            failures.push(format!(
                "{file}: generated {} sentences, accepted {}",
                generated.len(),
                accepted.len()
            ));
        }
        for sentence in &generated {
            if lang::parse(&rules, &nt, sentence, EngineLimits::none())
                .map(|p| p.is_empty())
                .unwrap_or(true)
            {
                failures.push(format!("{file}: generated {sentence:?} does not re-parse"));
            }
        }
    }
    assert!(start.elapsed().as_secs() < 30, "dcg suite too slow");
    report(8, "dcg-oracle", &failures);
}

// ---------------------------------------------------------------------
// 9. Generality: theta-subsumption vs brute force, lgg is a least
// generalization on a bounded class, and the flagship induction task.

fn random_ilp_clause(rng: &mut ChaCha8Rng) -> GeneralClause {
    let term = |rng: &mut ChaCha8Rng| -> Term {
        match rng.gen_range(0..6) {
            0 => Term::var("X"),
            1 => Term::var("Y"),
            2 => Term::var("Z"),
            3 => Term::atom("a"),
            4 => Term::atom("b"),
            _ => Term::comp("f", vec![Term::atom("a")]),
        }
    };
    let head = Term::comp("p", vec![term(rng), term(rng)]);
    let mut body = Vec::new();
    for _ in 0..rng.gen_range(0..=2usize) {
        if rng.gen_bool(0.5) {
            body.push(Term::comp("q", vec![term(rng)]));
        } else {
            body.push(Term::comp("r", vec![term(rng), term(rng)]));
        }
    }
    GeneralClause::new(vec![head], body)
}

#[test]
fn criterion_09_ilp_suite() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = Vec::new();
    for case in 0..500 {
        let c = random_ilp_clause(&mut rng);
        let d = random_ilp_clause(&mut rng);
        let got = induce::theta_subsumes(&c, &d).is_some();
        let want = subsumes_bruteforce(&c, &d);
        if got != want {
            failures.push(format!(
                "case {case}: theta_subsumes({c}, {d}) = {got}, oracle {want}"
            ));
        }
        if let Some(theta) = induce::theta_subsumes(&c, &d) {
            if &theta.apply(&c.head[0]) != &d.head[0]
                || !c.body.iter().all(|b| d.body.contains(&theta.apply(b)))
            {
                failures.push(format!("case {case}: witness substitution is wrong"));
            }
        }
    }
    // Bounded class: p/2 heads over {X, Y, a, b} with at most one q/1
    // body literal. lgg must be subsumed by every common generalization.
    let class: Vec<GeneralClause> = {
        let terms = [Term::var("X"), Term::var("Y"), Term::atom("a"), Term::atom("b")];
        let mut out = Vec::new();
        for t1 in &terms {
            for t2 in &terms {
                let head = Term::comp("p", vec![t1.clone(), t2.clone()]);
                out.push(GeneralClause::new(vec![head.clone()], vec![]));
                for t3 in &terms {
                    out.push(GeneralClause::new(
                        vec![head.clone()],
                        vec![Term::comp("q", vec![t3.clone()])],
                    ));
                }
            }
        }
        out
    };
    for case in 0..150 {
        let c = &class[rng.gen_range(0..class.len())];
        let d = &class[rng.gen_range(0..class.len())];
        let g = induce::lgg_clauses(c, d).expect("lgg failed");
        if induce::theta_subsumes(&g, c).is_none() || induce::theta_subsumes(&g, d).is_none() {
            failures.push(format!("lgg case {case}: {g} does not subsume {c} and {d}"));
        }
        for e in &class {
            if induce::theta_subsumes(e, c).is_some()
                && induce::theta_subsumes(e, d).is_some()
                && induce::theta_subsumes(e, &g).is_none()
            {
                failures.push(format!("lgg case {case}: {e} generalizes both but not {g}"));
            }
        }
    }
    // The flagship task: exactly one clause, a variant of the target.
    let text = std::fs::read_to_string(corpus_path("ch9/birds.pl")).expect("birds task");
    let task = induce::load_ilp_task(&text, InduceBounds::default()).expect("task load");
    let hypothesis = induce::induce(&task, EngineLimits::none())
        .expect("induce failed")
        .expect("no hypothesis");
    let target = GeneralClause::new(
        vec![Term::comp("flies", vec![Term::var("V")])],
        vec![Term::comp("bird", vec![Term::var("V")])],
    );
    let ok = hypothesis.len() == 1
        && induce::theta_subsumes(&hypothesis.clauses()[0], &target).is_some()
        && induce::theta_subsumes(&target, &hypothesis.clauses()[0]).is_some();
    if !ok {
        failures.push(format!(
            "birds task: expected a variant of {target}, got {:?}",
            hypothesis.clauses().iter().map(|c| c.to_string()).collect::<Vec<_>>()
        ));
    }
    assert!(start.elapsed().as_secs() < 30, "ilp suite too slow");
    report(9, "ilp-suite", &failures);
}

// ---------------------------------------------------------------------
// 10. Abduction: every explanation replays and respects constraints;
// the default-reasoning corpus case comes out exactly as documented.

fn check_explanations(
    spec: &reason::AbductionSpec,
    goal: &[Term],
    deltas: &[Explanation],
    failures: &mut Vec<String>,
    label: &str,
) {
    for delta in deltas {
        if !reason::replay_explanation(spec, goal, delta, EngineLimits::nodes(200_000))
            .unwrap_or(false)
        {
            failures.push(format!("{label}: explanation {delta:?} does not replay"));
        }
        let augmented = reason::program_with(&spec.program, delta);
        for constraint in &spec.constraints {
            let violated = sld::solve_all(
                &augmented,
                constraint,
                Strategy::DepthFirst,
                EngineLimits::nodes(200_000),
                quiet_flags(),
            )
            .map(|a| !a.is_empty())
            .unwrap_or(false);
            if violated {
                failures.push(format!("{label}: {delta:?} violates a constraint"));
            }
        }
    }
    for (i, a) in deltas.iter().enumerate() {
        for (j, b) in deltas.iter().enumerate() {
            if i != j && a.is_subset(b) && a != b {
                failures.push(format!("{label}: {b:?} is a superset of {a:?}"));
            }
        }
    }
}

#[test]
fn criterion_10_abduction_and_defaults() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut failures = Vec::new();
    // Corpus case: the broken-lamp diagnosis; the power-cut explanation
    // is ruled out by the running television.
    let text = std::fs::read_to_string(corpus_path("ch8/diagnosis.pl")).expect("diagnosis");
    let spec = reason::load_abduction_spec(&text).expect("spec load");
    let goal = [Term::atom("lamp_off")];
    let deltas = reason::abduce(&spec, &goal, EngineLimits::nodes(200_000)).expect("abduce");
    let expected: Vec<Explanation> =
        vec![[Term::atom("broken_bulb")].into_iter().collect()];
    if deltas != expected {
        failures.push(format!("diagnosis: expected {expected:?}, got {deltas:?}"));
    }
    check_explanations(&spec, &goal, &deltas, &mut failures, "diagnosis");
    // Random small specs: two abducibles, a few rules, sometimes a
    // constraint forbidding their conjunction.
    for case in 0..50 {
        let mut program = Program::new();
        if rng.gen_bool(0.7) {
            program.push(GeneralClause::new(vec![Term::atom("f0")], vec![]));
        }
        let lits = [Term::atom("ab0"), Term::atom("ab1"), Term::atom("f0")];
        for _ in 0..rng.gen_range(1..=2usize) {
            let body: Vec<Term> = (0..rng.gen_range(1..=2usize))
                .map(|_| lits[rng.gen_range(0..3)].clone())
                .collect();
            program.push(GeneralClause::new(vec![Term::atom("g")], body));
        }
        let constraints = if rng.gen_bool(0.3) {
            vec![vec![Term::atom("ab0"), Term::atom("ab1")]]
        } else {
            vec![]
        };
        let spec = reason::AbductionSpec::new(
            program,
            [("ab0".to_string(), 0), ("ab1".to_string(), 0)],
            constraints,
        )
        .expect("spec");
        let goal = [Term::atom("g")];
        match reason::abduce(&spec, &goal, EngineLimits::nodes(200_000)) {
            Ok(deltas) => check_explanations(
                &spec,
                &goal,
                &deltas,
                &mut failures,
                &format!("random {case}"),
            ),
            Err(EngineError::Undefined { .. }) => {}
            Err(e) => failures.push(format!("random {case}: {e}")),
        }
    }
    // Default reasoning: the penguin blocks the flying default.
    let text = std::fs::read_to_string(corpus_path("ch8/tweety.pl")).expect("tweety");
    let theory = reason::load_default_theory(&text).expect("theory load");
    let verdict = |name: &str| {
        reason::default_conclusions(
            &theory,
            &Term::comp("flies", vec![Term::atom(name)]),
            EngineLimits::nodes(200_000),
        )
        .expect("verdict")
    };
    match verdict("tweety") {
        DefaultVerdict::Holds { rule } if rule == "birds_fly" => {}
        v => failures.push(format!("tweety: expected holds(birds_fly), got {v}")),
    }
    match verdict("opus") {
        DefaultVerdict::Blocked { rule, exception }
            if rule == "birds_fly"
                && exception == Term::comp("penguin", vec![Term::atom("opus")]) => {}
        v => failures.push(format!("opus: expected blocked by penguin, got {v}")),
    }
    match verdict("rex") {
        DefaultVerdict::Underivable => {}
        v => failures.push(format!("rex: expected underivable, got {v}")),
    }
    // The compiled negation-as-failure program must agree.
    let compiled = theory.compile_to_naf();
    let flies = |name: &str| {
        sld::solve_all(
            &compiled,
            &[Term::comp("flies", vec![Term::atom(name)])],
            Strategy::DepthFirst,
            EngineLimits::nodes(200_000),
            quiet_flags(),
        )
        .map(|a| !a.is_empty())
        .unwrap_or(false)
    };
    if !flies("tweety") || flies("opus") || flies("rex") {
        failures.push("compiled NAF theory disagrees with the verdicts".into());
    }
    assert!(start.elapsed().as_secs() < 10, "abduction suite too slow");
    report(10, "abduction-and-defaults", &failures);
}
