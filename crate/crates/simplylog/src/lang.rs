//! Definite clause grammars: translation to definite clauses via
//! difference lists, parsing and generation, parse trees, and a small
//! question-answering agent with compositional semantics.

use crate::clausal::{GeneralClause, Program};
use crate::sld::{self, EngineError, EngineLimits, Flags, ProofKind, ProofTree, Strategy};
use crate::term::{unify, Subst, Term, VarSupply};
use std::collections::{HashMap, HashSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhsItem {
    Nonterminal(Term),
    /// A (possibly empty) sequence of terminal tokens.
    Terminals(Vec<Term>),
    /// A `{Goal}` element, called without consuming input.
    Goal(Term),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarRule {
    pub lhs: Term,
    pub rhs: Vec<RhsItem>,
}

impl GrammarRule {
    pub fn new(lhs: Term, rhs: Vec<RhsItem>) -> Result<GrammarRule, String> {
        match lhs {
            Term::Atom(_) | Term::Compound(..) => Ok(GrammarRule { lhs, rhs }),
            other => Err(format!("grammar rule head must be an atom or compound, got {other}")),
        }
    }

    /// Reads a `Lhs --> Rhs` term.
    pub fn from_term(t: &Term) -> Result<GrammarRule, String> {
        let Term::Compound(f, args) = t else {
            return Err(format!("not a grammar rule: {t}"));
        };
        if f != "-->" || args.len() != 2 {
            return Err(format!("not a grammar rule: {t}"));
        }
        let mut rhs = Vec::new();
        collect_rhs(&args[1], &mut rhs)?;
        GrammarRule::new(args[0].clone(), rhs)
    }

    pub fn lhs_functor(&self) -> (&str, usize) {
        self.lhs.functor().expect("lhs is callable")
    }
}

fn collect_rhs(t: &Term, out: &mut Vec<RhsItem>) -> Result<(), String> {
    match t {
        Term::Compound(f, args) if f == "," && args.len() == 2 => {
            collect_rhs(&args[0], out)?;
            collect_rhs(&args[1], out)
        }
        Term::Compound(f, args) if f == "{}" && args.len() == 1 => {
            out.push(RhsItem::Goal(args[0].clone()));
            Ok(())
        }
        Term::Atom(a) if a == "[]" => {
            out.push(RhsItem::Terminals(Vec::new()));
            Ok(())
        }
        Term::Compound(f, args) if f == "." && args.len() == 2 => match t.as_list() {
            Some(items) => {
                out.push(RhsItem::Terminals(items));
                Ok(())
            }
            None => Err(format!("terminal list must be proper: {t}")),
        },
        Term::Atom(_) | Term::Compound(..) => {
            out.push(RhsItem::Nonterminal(t.clone()));
            Ok(())
        }
        other => Err(format!("malformed grammar body element: {other}")),
    }
}

fn augment(nt: &Term, s0: Term, s1: Term) -> Term {
    match nt {
        Term::Atom(a) => Term::comp(a.clone(), vec![s0, s1]),
        Term::Compound(f, args) => {
            let mut all = args.clone();
            all.push(s0);
            all.push(s1);
            Term::comp(f.clone(), all)
        }
        _ => unreachable!("checked callable"),
    }
}

/// Standard difference-list translation: nonterminal `n(Args)` becomes
/// `n(Args, S0, S)`; a terminal list folds into the threading variables;
/// `{Goal}` passes through unthreaded.
pub fn dcg_translate(rule: &GrammarRule, supply: &mut VarSupply) -> GeneralClause {
    // one threading variable per position between rhs elements
    let mut pos = vec![supply.fresh()];
    let mut body = Vec::new();
    let mut terminal_binds: Vec<(String, Vec<Term>, String)> = Vec::new();
    for item in &rule.rhs {
        match item {
            RhsItem::Nonterminal(nt) => {
                let next = supply.fresh();
                body.push(augment(
                    nt,
                    Term::var(pos.last().unwrap().clone()),
                    Term::var(next.clone()),
                ));
                pos.push(next);
            }
            RhsItem::Terminals(ts) => {
                let next = supply.fresh();
                terminal_binds.push((pos.last().unwrap().clone(), ts.clone(), next.clone()));
                pos.push(next);
            }
            RhsItem::Goal(g) => body.push(g.clone()),
        }
    }
    let head = augment(
        &rule.lhs,
        Term::var(pos[0].clone()),
        Term::var(pos.last().unwrap().clone()),
    );
    // fold terminal lists into the threading variables, right to left so
    // earlier tails see their final shape
    let mut theta = Subst::new();
    for (from, ts, to) in terminal_binds.iter().rev() {
        let tail = theta.apply(&Term::var(to.clone()));
        let value = Term::partial_list(ts.clone(), tail);
        theta = theta.compose(&Subst::singleton(from.clone(), value));
    }
    GeneralClause::new(
        vec![theta.apply(&head)],
        body.iter().map(|b| theta.apply(b)).collect(),
    )
}

/// Translates a whole grammar into a definite program.
pub fn grammar_program(rules: &[GrammarRule]) -> Program {
    let mut supply = VarSupply::new();
    let mut p = Program::new();
    for r in rules {
        p.push(dcg_translate(r, &mut supply));
    }
    p
}

/// A parse tree: the proof tree restricted to grammar predicates, with
/// the difference-list threading arguments hidden.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseTree {
    pub label: Term,
    pub children: Vec<ParseTree>,
}

impl ParseTree {
    pub fn render(&self) -> String {
        fn go(t: &ParseTree, depth: usize, out: &mut String) {
            out.push_str(&format!(
                "{}{}\n",
                "  ".repeat(depth),
                crate::reader::write_term_default(&t.label)
            ));
            for c in &t.children {
                go(c, depth + 1, out);
            }
        }
        let mut out = String::new();
        go(self, 0, &mut out);
        out
    }
}

fn strip_threading(atom: &Term) -> Term {
    match atom {
        Term::Compound(f, args) if args.len() >= 2 => {
            let kept = &args[..args.len() - 2];
            if kept.is_empty() {
                Term::atom(f.clone())
            } else {
                Term::comp(f.clone(), kept.to_vec())
            }
        }
        other => other.clone(),
    }
}

fn parse_tree_of(proof: &ProofTree, grammar_preds: &HashSet<String>) -> Option<ParseTree> {
    let is_grammar = match proof.kind {
        ProofKind::Clause(_) | ProofKind::Root => proof
            .atom
            .functor()
            .map(|(f, _)| grammar_preds.contains(f))
            .unwrap_or(false),
        ProofKind::Builtin => false,
    };
    let children: Vec<ParseTree> = proof
        .children
        .iter()
        .filter_map(|c| parse_tree_of(c, grammar_preds))
        .collect();
    if is_grammar {
        Some(ParseTree {
            label: strip_threading(&proof.atom),
            children,
        })
    } else {
        // non-grammar node: splice its grammar children upward
        match children.len() {
            0 => None,
            1 => Some(children.into_iter().next().unwrap()),
            _ => Some(ParseTree {
                label: strip_threading(&proof.atom),
                children,
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParseResult {
    /// Bindings for the nonterminal's own variables.
    pub subst: Subst,
    pub tree: ParseTree,
}

pub fn sentence_term(tokens: &[String]) -> Term {
    Term::list(tokens.iter().map(|t| Term::atom(t.clone())).collect())
}

/// Parses `tokens` as the nonterminal `nt`: one result per distinct
/// derivation. Left-recursive grammars can exhaust resources under the
/// default depth-first exploration.
pub fn parse(
    rules: &[GrammarRule],
    nt: &Term,
    tokens: &[String],
    limits: EngineLimits,
) -> Result<Vec<ParseResult>, EngineError> {
    let program = grammar_program(rules);
    let preds: HashSet<String> = rules
        .iter()
        .map(|r| r.lhs_functor().0.to_string())
        .collect();
    let goal = augment(nt, sentence_term(tokens), Term::nil());
    let answers = sld::solve_all(
        &program,
        &[goal],
        Strategy::DepthFirst,
        limits,
        Flags {
            undefined_is_error: false,
            ..Flags::default()
        },
    )?;
    let nt_vars = nt.variables();
    Ok(answers
        .into_iter()
        .map(|a| {
            let root = if a.proof.children.len() == 1 {
                a.proof.children[0].clone()
            } else {
                a.proof.clone()
            };
            let tree = parse_tree_of(&root, &preds).unwrap_or(ParseTree {
                label: strip_threading(&root.atom),
                children: Vec::new(),
            });
            ParseResult {
                subst: a.subst.restrict(&nt_vars),
                tree,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------
// generation

#[derive(Clone)]
enum Sym {
    T(String),
    N(Term),
}

/// Minimum terminal yield per nonterminal name, by fixpoint; used to
/// prune derivations that cannot stay within the length bound.
fn min_yields(rules: &[GrammarRule]) -> HashMap<String, usize> {
    let mut min: HashMap<String, usize> = HashMap::new();
    loop {
        let mut changed = false;
        for r in rules {
            let name = r.lhs_functor().0.to_string();
            let mut total = 0usize;
            let mut known = true;
            for item in &r.rhs {
                match item {
                    RhsItem::Terminals(ts) => total += ts.len(),
                    RhsItem::Nonterminal(nt) => {
                        let n = nt.functor().map(|(f, _)| f.to_string()).unwrap_or_default();
                        match min.get(&n) {
                            Some(v) => total += v,
                            None => known = false,
                        }
                    }
                    RhsItem::Goal(_) => {}
                }
            }
            if known {
                let entry = min.get(&name).copied();
                if entry.map(|e| total < e).unwrap_or(true) {
                    min.insert(name, total);
                    changed = true;
                }
            }
        }
        if !changed {
            return min;
        }
    }
}

/// Enumerates the sentences of length ≤ `max_len` derivable from `nt`,
/// shortest first (ties in token order). `{Goal}` elements are skipped
/// during generation.
pub fn generate(rules: &[GrammarRule], nt: &Term, max_len: usize) -> Vec<Vec<String>> {
    let minimums = min_yields(rules);
    let lower_bound = |syms: &[Sym], done: usize| -> usize {
        done + syms
            .iter()
            .map(|s| match s {
                Sym::T(_) => 1,
                Sym::N(n) => n
                    .functor()
                    .and_then(|(f, _)| minimums.get(f).copied())
                    .unwrap_or(0),
            })
            .sum::<usize>()
    };
    // generous cap on derivation length guards against unit/epsilon cycles
    let step_cap = (max_len + 2) * (rules.len() + 2) * 4;
    let mut supply = VarSupply::new();
    let mut out: HashSet<Vec<String>> = HashSet::new();
    // item: (emitted tokens, remaining symbols, steps used)
    let mut work: Vec<(Vec<String>, Vec<Sym>, usize)> =
        vec![(Vec::new(), vec![Sym::N(nt.clone())], 0)];
    while let Some((mut done, mut syms, steps)) = work.pop() {
        // consume leading terminals
        loop {
            match syms.first() {
                Some(Sym::T(_)) => {
                    if let Sym::T(t) = syms.remove(0) {
                        done.push(t);
                    }
                }
                _ => break,
            }
        }
        if done.len() > max_len {
            continue;
        }
        let Some(Sym::N(head)) = syms.first().cloned() else {
            out.insert(done);
            continue;
        };
        if steps >= step_cap {
            continue;
        }
        for r in rules {
            let renamed_lhs;
            let renamed_rhs;
            {
                // rename the whole rule apart, keeping shared variables shared
                let mut all = vec![r.lhs.clone()];
                for item in &r.rhs {
                    match item {
                        RhsItem::Nonterminal(t) | RhsItem::Goal(t) => all.push(t.clone()),
                        RhsItem::Terminals(ts) => all.extend(ts.iter().cloned()),
                    }
                }
                let fresh = crate::term::rename_terms(&all, &mut supply);
                renamed_lhs = fresh[0].clone();
                let mut it = fresh.into_iter().skip(1);
                renamed_rhs = r
                    .rhs
                    .iter()
                    .map(|item| match item {
                        RhsItem::Nonterminal(_) => RhsItem::Nonterminal(it.next().unwrap()),
                        RhsItem::Goal(_) => RhsItem::Goal(it.next().unwrap()),
                        RhsItem::Terminals(ts) => {
                            RhsItem::Terminals((0..ts.len()).map(|_| it.next().unwrap()).collect())
                        }
                    })
                    .collect::<Vec<_>>();
            }
            let Some(theta) = unify(&head, &renamed_lhs, true) else {
                continue;
            };
            let mut new_syms: Vec<Sym> = Vec::new();
            let mut ok = true;
            for item in &renamed_rhs {
                match item {
                    RhsItem::Nonterminal(t) => new_syms.push(Sym::N(theta.apply(t))),
                    RhsItem::Goal(_) => {}
                    RhsItem::Terminals(ts) => {
                        for t in ts {
                            match theta.apply(t) {
                                Term::Atom(a) => new_syms.push(Sym::T(a)),
                                _ => ok = false,
                            }
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut rest: Vec<Sym> = Vec::new();
            rest.extend(new_syms);
            for s in syms.iter().skip(1) {
                rest.push(match s {
                    Sym::T(t) => Sym::T(t.clone()),
                    Sym::N(n) => Sym::N(theta.apply(n)),
                });
            }
            if lower_bound(&rest, done.len()) > max_len {
                continue;
            }
            work.push((done.clone(), rest, steps + 1));
        }
    }
    let mut sentences: Vec<Vec<String>> = out.into_iter().collect();
    sentences.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sentences
}

// ---------------------------------------------------------------------
// the question-answering agent

/// The agent's word list: proper nouns name individuals, common nouns
/// name unary predicates. The grammar around it is fixed.
#[derive(Clone, Debug)]
pub struct Lexicon {
    pub proper_nouns: Vec<String>,
    pub common_nouns: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Lexicon {
        Lexicon {
            proper_nouns: vec![
                "socrates".into(),
                "plato".into(),
                "peter".into(),
            ],
            common_nouns: vec![
                "human".into(),
                "mortal".into(),
                "philosopher".into(),
                "greek".into(),
                "teacher".into(),
            ],
        }
    }
}

#[derive(Clone, Debug)]
pub struct KnowledgeStore {
    pub program: Program,
    pub lexicon: Lexicon,
}

impl Default for KnowledgeStore {
    fn default() -> KnowledgeStore {
        KnowledgeStore {
            program: Program::new(),
            lexicon: Lexicon::default(),
        }
    }
}

/// The fixed agent grammar with meaning composition in the rule heads:
/// declaratives carry a `fact/2` or `rule/2` meaning term, questions an
/// `isq/2` or `whoq/1` meaning term.
pub fn agent_grammar(lexicon: &Lexicon) -> Vec<GrammarRule> {
    let v = |n: &str| Term::var(n.to_string());
    let nt = |f: &str, args: Vec<Term>| Term::comp(f.to_string(), args);
    let word = |w: &str| RhsItem::Terminals(vec![Term::atom(w.to_string())]);
    let mut rules = vec![
        // "socrates is (a) human"  =>  fact(human, socrates)
        GrammarRule::new(
            nt("decl", vec![nt("fact", vec![v("C"), v("X")])]),
            vec![
                RhsItem::Nonterminal(nt("pn", vec![v("X")])),
                word("is"),
                RhsItem::Nonterminal(Term::atom("art")),
                RhsItem::Nonterminal(nt("cn", vec![v("C")])),
            ],
        )
        .unwrap(),
        // "every human is (a) mortal"  =>  rule(human, mortal)
        GrammarRule::new(
            nt("decl", vec![nt("rule", vec![v("A"), v("B")])]),
            vec![
                word("every"),
                RhsItem::Nonterminal(nt("cn", vec![v("A")])),
                word("is"),
                RhsItem::Nonterminal(Term::atom("art")),
                RhsItem::Nonterminal(nt("cn", vec![v("B")])),
            ],
        )
        .unwrap(),
        // "is socrates (a) mortal"  =>  isq(mortal, socrates)
        GrammarRule::new(
            nt("quest", vec![nt("isq", vec![v("C"), v("X")])]),
            vec![
                word("is"),
                RhsItem::Nonterminal(nt("pn", vec![v("X")])),
                RhsItem::Nonterminal(Term::atom("art")),
                RhsItem::Nonterminal(nt("cn", vec![v("C")])),
            ],
        )
        .unwrap(),
        // "who is (a) mortal"  =>  whoq(mortal)
        GrammarRule::new(
            nt("quest", vec![nt("whoq", vec![v("C")])]),
            vec![
                word("who"),
                word("is"),
                RhsItem::Nonterminal(Term::atom("art")),
                RhsItem::Nonterminal(nt("cn", vec![v("C")])),
            ],
        )
        .unwrap(),
        GrammarRule::new(Term::atom("art"), vec![RhsItem::Terminals(vec![])]).unwrap(),
        GrammarRule::new(Term::atom("art"), vec![word("a")]).unwrap(),
    ];
    for w in &lexicon.proper_nouns {
        rules.push(
            GrammarRule::new(nt("pn", vec![Term::atom(w.clone())]), vec![word(w)]).unwrap(),
        );
    }
    for w in &lexicon.common_nouns {
        rules.push(
            GrammarRule::new(nt("cn", vec![Term::atom(w.clone())]), vec![word(w)]).unwrap(),
        );
    }
    rules
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    /// The longest prefix of the sentence that fits the agent grammar.
    pub parseable_prefix: Vec<String>,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.parseable_prefix.is_empty() {
            write!(f, "sentence not understood (no parseable prefix)")
        } else {
            write!(
                f,
                "sentence not understood after \"{}\"",
                self.parseable_prefix.join(" ")
            )
        }
    }
}

enum Slot {
    Lit(&'static str),
    Pn,
    Cn,
    OptA,
}

fn templates(question: bool) -> Vec<Vec<Slot>> {
    use Slot::*;
    if question {
        vec![
            vec![Lit("is"), Pn, OptA, Cn],
            vec![Lit("who"), Lit("is"), OptA, Cn],
        ]
    } else {
        vec![
            vec![Pn, Lit("is"), OptA, Cn],
            vec![Lit("every"), Cn, Lit("is"), OptA, Cn],
        ]
    }
}

fn longest_prefix(lexicon: &Lexicon, tokens: &[String], question: bool) -> usize {
    fn matched(slots: &[Slot], tokens: &[String], lex: &Lexicon, i: usize) -> usize {
        let Some(slot) = slots.first() else { return i };
        let Some(tok) = tokens.get(i) else { return i };
        match slot {
            Slot::Lit(w) if tok == w => matched(&slots[1..], tokens, lex, i + 1),
            Slot::Pn if lex.proper_nouns.contains(tok) => matched(&slots[1..], tokens, lex, i + 1),
            Slot::Cn if lex.common_nouns.contains(tok) => matched(&slots[1..], tokens, lex, i + 1),
            Slot::OptA => {
                let skipped = matched(&slots[1..], tokens, lex, i);
                let consumed = if tok == "a" {
                    matched(&slots[1..], tokens, lex, i + 1)
                } else {
                    i
                };
                skipped.max(consumed)
            }
            _ => i,
        }
    }
    templates(question)
        .iter()
        .map(|t| matched(t, tokens, lexicon, 0))
        .max()
        .unwrap_or(0)
}

fn parse_meaning(
    store: &KnowledgeStore,
    tokens: &[String],
    question: bool,
) -> Result<Term, Rejection> {
    let rules = agent_grammar(&store.lexicon);
    let nt = if question { "quest" } else { "decl" };
    let goal_nt = Term::comp(nt, vec![Term::var("M")]);
    let results = parse(&rules, &goal_nt, tokens, EngineLimits::nodes(100_000))
        .map_err(|_| Rejection {
            parseable_prefix: Vec::new(),
        })?;
    match results.first().and_then(|r| r.subst.get("M").cloned()) {
        Some(m) => Ok(m),
        None => Err(Rejection {
            parseable_prefix: tokens
                [..longest_prefix(&store.lexicon, tokens, question)]
                .to_vec(),
        }),
    }
}

/// Adds the meaning of a declarative sentence to the store: copula
/// sentences "X is a C" become the fact C(X), universal sentences
/// "every A is a B" become B(X) :- A(X).
pub fn qa_tell(store: &KnowledgeStore, tokens: &[String]) -> Result<KnowledgeStore, Rejection> {
    let meaning = parse_meaning(store, tokens, false)?;
    let clause = match &meaning {
        Term::Compound(f, args) if f == "fact" && args.len() == 2 => GeneralClause::new(
            vec![Term::comp(atom_name(&args[0]), vec![args[1].clone()])],
            vec![],
        ),
        Term::Compound(f, args) if f == "rule" && args.len() == 2 => GeneralClause::new(
            vec![Term::comp(atom_name(&args[1]), vec![Term::var("X")])],
            vec![Term::comp(atom_name(&args[0]), vec![Term::var("X")])],
        ),
        _ => {
            return Err(Rejection {
                parseable_prefix: Vec::new(),
            })
        }
    };
    let mut program = store.program.clone();
    program.push(clause);
    Ok(KnowledgeStore {
        program,
        lexicon: store.lexicon.clone(),
    })
}

fn atom_name(t: &Term) -> String {
    match t {
        Term::Atom(a) => a.clone(),
        other => other.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AskAnswer {
    Yes,
    NoAnswerFound,
    /// Wh-question bindings rendered back into sentences.
    Answers(Vec<Vec<String>>),
}

/// Queries the store with an interrogative sentence. Yes/no questions
/// answer yes or no-answer-found; wh-questions list each binding as a
/// generated declarative sentence.
pub fn qa_ask(store: &KnowledgeStore, tokens: &[String]) -> Result<AskAnswer, Rejection> {
    let meaning = parse_meaning(store, tokens, true)?;
    let limits = EngineLimits {
        max_depth: Some(64),
        max_nodes: Some(200_000),
    };
    let flags = Flags {
        undefined_is_error: false,
        ..Flags::default()
    };
    match &meaning {
        Term::Compound(f, args) if f == "isq" && args.len() == 2 => {
            let goal = Term::comp(atom_name(&args[0]), vec![args[1].clone()]);
            let found = sld::solve_all(&store.program, &[goal], Strategy::DepthFirst, limits, flags)
                .map(|v| !v.is_empty())
                .unwrap_or(false);
            Ok(if found {
                AskAnswer::Yes
            } else {
                AskAnswer::NoAnswerFound
            })
        }
        Term::Compound(f, args) if f == "whoq" && args.len() == 1 => {
            let c = atom_name(&args[0]);
            let goal = Term::comp(c.clone(), vec![Term::var("W")]);
            let answers =
                sld::solve_all(&store.program, &[goal], Strategy::DepthFirst, limits, flags)
                    .unwrap_or_default();
            let rules = agent_grammar(&store.lexicon);
            let mut sentences = Vec::new();
            for a in answers {
                let Some(Term::Atom(who)) = a.subst.get("W").cloned() else {
                    continue;
                };
                // render the binding through the grammar itself
                let nt = Term::comp(
                    "decl",
                    vec![Term::comp(
                        "fact",
                        vec![Term::atom(c.clone()), Term::atom(who)],
                    )],
                );
                if let Some(s) = generate(&rules, &nt, 5).into_iter().next() {
                    if !sentences.contains(&s) {
                        sentences.push(s);
                    }
                }
            }
            if sentences.is_empty() {
                Ok(AskAnswer::NoAnswerFound)
            } else {
                Ok(AskAnswer::Answers(sentences))
            }
        }
        _ => Err(Rejection {
            parseable_prefix: Vec::new(),
        }),
    }
}

pub fn tokenize_sentence(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}
