//! Command-line front end: a REPL for consulting programmes and running
//! queries under selectable strategies, plus subcommands exposing the
//! clausal, model, refutation, search, grammar, abduction and induction
//! pipelines.

use clap::{Parser, Subcommand, ValueEnum};
use simplylog::clausal::{self, GeneralClause, RefuteOutcome};
use simplylog::fol;
use simplylog::induce::{self, InduceBounds};
use simplylog::lang;
use simplylog::reader::{self, ClauseKind, SourceClause};
use simplylog::reason;
use simplylog::search::{
    best_first, local_search, parse_problem, uninformed_search, BestFirstKind, LocalKind,
    Outcome, SearchOptions, UninformedKind,
};
use simplylog::sld::{
    self, trace_line, EngineError, EngineLimits, Flags, Solver, Strategy,
};
use simplylog::{Program, Term, VarSupply};
use std::io::{BufRead, IsTerminal, Write};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "simplylog", version, about = "A logic-programming engine and reasoning toolkit")]
struct Cli {
    /// Programme file to consult (repeatable)
    #[arg(long, global = true)]
    consult: Vec<String>,
    /// Goal to run after consulting (repeatable)
    #[arg(long)]
    goal: Vec<String>,
    /// Exploration strategy for queries
    #[arg(long, value_enum, default_value_t = StrategyArg::Dfs)]
    strategy: StrategyArg,
    /// Depth limit for derivations
    #[arg(long)]
    max_depth: Option<u32>,
    /// Node budget for derivations
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Unify without the occurs check
    #[arg(long)]
    no_occurs_check: bool,
    /// Print four-port trace lines while solving
    #[arg(long)]
    trace: bool,
    /// Suppress informational chatter
    #[arg(long)]
    quiet: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum StrategyArg {
    Dfs,
    Bfs,
    Id,
}

impl StrategyArg {
    fn to_strategy(self) -> Strategy {
        match self {
            StrategyArg::Dfs => Strategy::DepthFirst,
            StrategyArg::Bfs => Strategy::BreadthFirst,
            StrategyArg::Id => Strategy::IterativeDeepening { step: 1 },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Convert first-order formulas to clausal form
    Clausify { file: String },
    /// Print the predicate completion of a definite programme
    Complete {
        file: String,
        /// Include the equality theory
        #[arg(long)]
        equality: bool,
    },
    /// Compute the least Herbrand model to a term depth
    Model {
        file: String,
        #[arg(long, default_value_t = 2)]
        depth: u32,
    },
    /// Run resolution refutation over a set of clauses
    Refute {
        file: String,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Solve a graph search problem
    Search {
        file: String,
        #[arg(long, value_enum, default_value_t = SearchKind::AStar)]
        kind: SearchKind,
        #[arg(long, default_value_t = 2)]
        beam_width: usize,
        #[arg(long)]
        max_expanded: Option<u64>,
    },
    /// Export the SLD-tree of a goal
    Sldtree {
        file: String,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 8)]
        depth: u32,
        #[arg(long)]
        json: bool,
    },
    /// Print the proof tree of the first answer to a goal
    Proof {
        file: String,
        #[arg(long)]
        goal: String,
        #[arg(long)]
        json: bool,
    },
    /// Induce a hypothesis from pos/neg examples
    Induce { file: String },
    /// Find abductive explanations for a goal
    Abduce {
        file: String,
        #[arg(long)]
        goal: String,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum SearchKind {
    Dfs,
    Bfs,
    Id,
    Greedy,
    AStar,
    Beam,
    HillClimb,
}

struct Session {
    program: Program,
    strategy: Strategy,
    limits: EngineLimits,
    flags: Flags,
    trace: bool,
    quiet: bool,
    store: lang::KnowledgeStore,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut session = Session {
        program: Program::new(),
        strategy: cli.strategy.to_strategy(),
        limits: EngineLimits {
            max_depth: cli.max_depth,
            max_nodes: cli.max_nodes,
        },
        flags: Flags {
            occurs_check: !cli.no_occurs_check,
            undefined_is_error: true,
        },
        trace: cli.trace,
        quiet: cli.quiet,
        store: lang::KnowledgeStore::default(),
    };
    for file in &cli.consult {
        match consult_file(&session.program, file) {
            Ok(p) => {
                if !session.quiet {
                    println!("% consulted {file}");
                }
                session.program = p;
            }
            Err(msg) => {
                eprintln!("{msg}");
                return ExitCode::from(2);
            }
        }
    }
    match cli.command {
        Some(cmd) => run_subcommand(cmd),
        None if !cli.goal.is_empty() => run_goals(&mut session, &cli.goal),
        None => {
            repl(&mut session);
            ExitCode::SUCCESS
        }
    }
}

fn consult_file(base: &Program, path: &str) -> Result<Program, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("% error: cannot read {path}: {e}"))?;
    let parsed = reader::parse_program_with(&text, Some(path), &reader::OperatorTable::default(), &mut VarSupply::new());
    if let Some(e) = parsed.errors.first() {
        return Err(format!("% error: {e}"));
    }
    let clauses: Vec<SourceClause> = parsed
        .clauses
        .into_iter()
        .filter(|c| !matches!(c.kind, ClauseKind::Directive | ClauseKind::Query))
        .collect();
    sld::consult(base, &clauses).map_err(|e| format!("% error: {e}"))
}

fn parse_goal(text: &str) -> Result<(Vec<Term>, Vec<String>), String> {
    let t = reader::parse_term(text).map_err(|e| format!("% error: {e}"))?;
    let goals = clausal::conjuncts(&t).map_err(|e| format!("% error: {e}"))?;
    let mut vars = Vec::new();
    for g in &goals {
        for v in g.variables() {
            if !vars.contains(&v) && !v.starts_with("_G") {
                vars.push(v);
            }
        }
    }
    Ok((goals, vars))
}

enum GoalStatus {
    Succeeded,
    Failed,
    Errored,
}

/// Non-interactive goal run: prints every answer, one per line.
fn run_one_goal(session: &Session, text: &str) -> GoalStatus {
    let (goals, vars) = match parse_goal(text) {
        Ok(g) => g,
        Err(msg) => {
            println!("{msg}");
            return GoalStatus::Errored;
        }
    };
    let mut supply = VarSupply::new();
    let mut trace_cb = |port, depth: u32, atom: &Term| {
        println!("{}", trace_line(port, depth, atom));
    };
    let solver = match Solver::new(
        &session.program,
        &goals,
        session.strategy,
        session.limits,
        session.flags,
        &mut supply,
    ) {
        Ok(s) => s,
        Err(e) => {
            println!("% error: {e}");
            return GoalStatus::Errored;
        }
    };
    let solver = if session.trace {
        solver.with_trace(&mut trace_cb)
    } else {
        solver
    };
    let mut any = false;
    for item in solver {
        match item {
            Ok(answer) => {
                any = true;
                println!("{}", sld::format_answer(&answer.subst, &vars));
                if vars.is_empty() {
                    break; // a variable-free success is final
                }
            }
            Err(EngineError::ResourcesExhausted) => {
                println!("% resources exhausted");
                return if any {
                    GoalStatus::Succeeded
                } else {
                    GoalStatus::Errored
                };
            }
            Err(e) => {
                println!("% error: {e}");
                return GoalStatus::Errored;
            }
        }
    }
    if any {
        GoalStatus::Succeeded
    } else {
        println!("false.");
        GoalStatus::Failed
    }
}

fn run_goals(session: &mut Session, goals: &[String]) -> ExitCode {
    let mut worst = 0u8;
    for g in goals {
        match run_one_goal(session, g) {
            GoalStatus::Succeeded => {}
            GoalStatus::Failed => worst = worst.max(1),
            GoalStatus::Errored => worst = worst.max(2),
        }
    }
    ExitCode::from(worst)
}

// ---------------------------------------------------------------------
// the REPL

struct Input {
    lines: std::io::Lines<std::io::BufReader<std::io::Stdin>>,
    pushback: Option<String>,
    interactive: bool,
}

impl Input {
    fn new() -> Input {
        let stdin = std::io::stdin();
        let interactive = stdin.is_terminal();
        Input {
            lines: std::io::BufReader::new(stdin).lines(),
            pushback: None,
            interactive,
        }
    }

    fn next_line(&mut self, prompt: &str) -> Option<String> {
        if let Some(l) = self.pushback.take() {
            return Some(l);
        }
        if self.interactive {
            print!("{prompt}");
            let _ = std::io::stdout().flush();
        }
        self.lines.next().and_then(|r| r.ok())
    }
}

fn repl(session: &mut Session) {
    if !session.quiet {
        println!("% simplylog — type a goal, or halt. to leave");
    }
    let mut input = Input::new();
    while let Some(raw) = input.next_line("?- ") {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line == "halt." || line == "halt" {
            break;
        }
        if let Some(rest) = line.strip_prefix("tell ") {
            let sentence = lang::tokenize_sentence(rest.trim_end_matches('.'));
            match lang::qa_tell(&session.store, &sentence) {
                Ok(store) => {
                    session.store = store;
                    println!("ok.");
                }
                Err(r) => println!("% {r}"),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("ask ") {
            let sentence = lang::tokenize_sentence(rest.trim_end_matches('.'));
            match lang::qa_ask(&session.store, &sentence) {
                Ok(lang::AskAnswer::Yes) => println!("yes."),
                Ok(lang::AskAnswer::NoAnswerFound) => println!("no answer found."),
                Ok(lang::AskAnswer::Answers(sentences)) => {
                    for s in sentences {
                        println!("{}.", s.join(" "));
                    }
                }
                Err(r) => println!("% {r}"),
            }
            continue;
        }
        if handle_command(session, line) {
            continue;
        }
        let query = line
            .strip_prefix("?-")
            .unwrap_or(line)
            .trim()
            .trim_end_matches('.');
        run_query_interactive(session, query, &mut input);
    }
}

/// Session-state commands; returns true when the line was a command.
fn handle_command(session: &mut Session, line: &str) -> bool {
    let body = line.trim_end_matches('.');
    let (name, arg) = match body.find('(') {
        Some(i) if body.ends_with(')') => (&body[..i], &body[i + 1..body.len() - 1]),
        _ => (body, ""),
    };
    match name {
        "consult" => {
            let file = arg.trim_matches(|c| c == '\'' || c == '"');
            match consult_file(&session.program, file) {
                Ok(p) => {
                    session.program = p;
                    if !session.quiet {
                        println!("% consulted {file}");
                    }
                }
                Err(msg) => println!("{msg}"),
            }
            true
        }
        "strategy" => {
            match arg {
                "dfs" => session.strategy = Strategy::DepthFirst,
                "bfs" => session.strategy = Strategy::BreadthFirst,
                "id" => session.strategy = Strategy::IterativeDeepening { step: 1 },
                other => {
                    println!("% error: unknown strategy {other} (dfs|bfs|id)");
                    return true;
                }
            }
            println!("% strategy set to {arg}");
            true
        }
        "max_depth" => match arg.parse::<u32>() {
            Ok(d) => {
                session.limits.max_depth = Some(d);
                println!("% max_depth set to {d}");
                true
            }
            Err(_) => {
                println!("% error: max_depth needs a number");
                true
            }
        },
        "max_nodes" => match arg.parse::<u64>() {
            Ok(n) => {
                session.limits.max_nodes = Some(n);
                println!("% max_nodes set to {n}");
                true
            }
            Err(_) => {
                println!("% error: max_nodes needs a number");
                true
            }
        },
        "no_limits" => {
            session.limits = EngineLimits::none();
            println!("% limits cleared");
            true
        }
        "trace" => {
            match arg {
                "on" => session.trace = true,
                "off" => session.trace = false,
                _ => {
                    println!("% error: trace(on) or trace(off)");
                    return true;
                }
            }
            println!("% trace {arg}");
            true
        }
        "occurs_check" => {
            match arg {
                "on" => session.flags.occurs_check = true,
                "off" => session.flags.occurs_check = false,
                _ => {
                    println!("% error: occurs_check(on) or occurs_check(off)");
                    return true;
                }
            }
            println!("% occurs_check {arg}");
            true
        }
        "listing" => {
            for c in session.program.clauses() {
                println!("{}", reader::write_clause(&c.to_term()));
            }
            true
        }
        _ => false,
    }
}

/// Interactive answer protocol: `;` requests the next answer, anything
/// else stops (and is replayed as the next input line).
fn run_query_interactive(session: &Session, query: &str, input: &mut Input) {
    let (goals, vars) = match parse_goal(query) {
        Ok(g) => g,
        Err(msg) => {
            println!("{msg}");
            return;
        }
    };
    let mut supply = VarSupply::new();
    let mut trace_cb = |port, depth: u32, atom: &Term| {
        println!("{}", trace_line(port, depth, atom));
    };
    let solver = match Solver::new(
        &session.program,
        &goals,
        session.strategy,
        session.limits,
        session.flags,
        &mut supply,
    ) {
        Ok(s) => s,
        Err(e) => {
            println!("% error: {e}");
            return;
        }
    };
    let mut solver = if session.trace {
        solver.with_trace(&mut trace_cb)
    } else {
        solver
    };
    let mut shown = 0usize;
    loop {
        match solver.next() {
            Some(Ok(answer)) => {
                let text = sld::format_answer(&answer.subst, &vars);
                if vars.is_empty() {
                    println!("{text}"); // true.
                    return;
                }
                shown += 1;
                println!("{text} ;");
                match input.next_line("") {
                    Some(l) if l.trim() == ";" => continue,
                    Some(l) if l.trim().is_empty() => return,
                    Some(l) => {
                        input.pushback = Some(l);
                        return;
                    }
                    None => return,
                }
            }
            Some(Err(EngineError::ResourcesExhausted)) => {
                println!("% resources exhausted");
                return;
            }
            Some(Err(e)) => {
                println!("% error: {e}");
                return;
            }
            None => {
                let _ = shown;
                println!("false.");
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------
// subcommands

/// Renames machine-issued variables to readable letters (X, Y, Z, …)
/// in order of first appearance, for display only.
fn display_clause(c: &GeneralClause) -> String {
    let letters = ["X", "Y", "Z", "U", "V", "W", "S", "T", "P", "Q", "R"];
    let t = c.to_term();
    let mut renaming = simplylog::Subst::new();
    let mut used = 0usize;
    for v in t.variables() {
        let name = letters
            .get(used)
            .map(|l| l.to_string())
            .unwrap_or_else(|| format!("X{}", used - letters.len() + 1));
        used += 1;
        renaming.bind(v, Term::Var(name));
    }
    reader::write_clause(&renaming.apply(&t))
}

fn read_file(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("% error: cannot read {path}: {e}"))
}

fn load_clauses(path: &str) -> Result<Vec<GeneralClause>, String> {
    let text = read_file(path)?;
    let parsed = reader::parse_program_with(&text, Some(path), &reader::OperatorTable::default(), &mut VarSupply::new());
    if let Some(e) = parsed.errors.first() {
        return Err(format!("% error: {e}"));
    }
    let mut out = Vec::new();
    for sc in &parsed.clauses {
        // `:- Body` lines are denials here, not directives
        if matches!(sc.kind, ClauseKind::Query) {
            continue;
        }
        out.push(GeneralClause::from_term(&sc.term).map_err(|e| format!("% error: {e}"))?);
    }
    Ok(out)
}

fn load_program(path: &str) -> Result<Program, String> {
    consult_file(&Program::new(), path)
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("{msg}");
    ExitCode::from(2)
}

fn run_subcommand(cmd: Command) -> ExitCode {
    match cmd {
        Command::Clausify { file } => {
            let text = match read_file(&file) {
                Ok(t) => t,
                Err(m) => return fail(&m),
            };
            let parsed = reader::parse_program_with(&text, Some(&file), &reader::OperatorTable::default(), &mut VarSupply::new());
            if let Some(e) = parsed.errors.first() {
                return fail(&format!("% error: {e}"));
            }
            let mut supply = fol::SkolemSupply::new();
            for sc in &parsed.clauses {
                let formula = match fol::Formula::from_term(&sc.term) {
                    Ok(f) => f,
                    Err(e) => return fail(&format!("% error: {e}")),
                };
                for c in fol::to_clausal_form(&formula, &mut supply) {
                    println!("{}", display_clause(&c));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Complete { file, equality } => {
            let program = match load_program(&file) {
                Ok(p) => p,
                Err(m) => return fail(&m),
            };
            let completion = match fol::predicate_completion(&program) {
                Ok(c) => c,
                Err(e) => return fail(&format!("% error: {e}")),
            };
            for d in &completion.definitions {
                println!("{d}");
            }
            if equality {
                for e in &completion.equality_theory {
                    println!("{e}");
                }
            }
            ExitCode::SUCCESS
        }
        Command::Model { file, depth } => {
            let program = match load_program(&file) {
                Ok(p) => p,
                Err(m) => return fail(&m),
            };
            let lm = match clausal::least_herbrand_model(&program, depth, 100_000) {
                Ok(m) => m,
                Err(e) => return fail(&format!("% error: {e}")),
            };
            let atoms: Vec<String> = lm
                .model
                .true_atoms
                .iter()
                .map(|a| format!("{}.", reader::write_term_default(a)))
                .collect();
            println!("{}", atoms.join(" "));
            if lm.partial {
                println!("% fixpoint not reached (fuel exhausted)");
            }
            ExitCode::SUCCESS
        }
        Command::Refute { file, max_steps } => {
            let clauses = match load_clauses(&file) {
                Ok(c) => c,
                Err(m) => return fail(&m),
            };
            let result = clausal::resolution_refute(&clauses, max_steps);
            match result.outcome {
                RefuteOutcome::Refuted(steps) => {
                    if let Some(r) = &result.refutation {
                        print!("{}", r.render_trace());
                    }
                    println!("% unsatisfiable ({steps} steps)");
                    ExitCode::SUCCESS
                }
                RefuteOutcome::Saturated => {
                    println!("% saturated without the empty clause (satisfiable)");
                    ExitCode::from(1)
                }
                RefuteOutcome::Budget => {
                    println!("% step budget exhausted");
                    ExitCode::from(1)
                }
            }
        }
        Command::Search {
            file,
            kind,
            beam_width,
            max_expanded,
        } => {
            let text = match read_file(&file) {
                Ok(t) => t,
                Err(m) => return fail(&m),
            };
            let problem = match parse_problem(&text) {
                Ok(p) => p,
                Err(e) => return fail(&format!("% error: {e}")),
            };
            let opts = SearchOptions {
                beam_width,
                max_expanded,
                ..SearchOptions::default()
            };
            let result = match kind {
                SearchKind::Dfs => uninformed_search(&problem, UninformedKind::DepthFirst, opts),
                SearchKind::Bfs => uninformed_search(&problem, UninformedKind::BreadthFirst, opts),
                SearchKind::Id => {
                    uninformed_search(&problem, UninformedKind::IterativeDeepening, opts)
                }
                SearchKind::Greedy => best_first(&problem, BestFirstKind::Greedy, opts),
                SearchKind::AStar => best_first(&problem, BestFirstKind::AStar, opts),
                SearchKind::Beam => local_search(&problem, LocalKind::Beam, opts),
                SearchKind::HillClimb => local_search(&problem, LocalKind::HillClimb, opts),
            };
            let code = match &result.outcome {
                Outcome::Found { path, cost } => {
                    println!("path: {}", path.join(" -> "));
                    println!("cost: {cost}");
                    ExitCode::SUCCESS
                }
                Outcome::Exhausted => {
                    println!("no path found");
                    ExitCode::from(1)
                }
                Outcome::BudgetExceeded => {
                    println!("budget exceeded");
                    ExitCode::from(1)
                }
            };
            println!("{}", result.stats);
            code
        }
        Command::Sldtree {
            file,
            goal,
            depth,
            json,
        } => {
            let program = match load_program(&file) {
                Ok(p) => p,
                Err(m) => return fail(&m),
            };
            let (goals, _) = match parse_goal(&goal) {
                Ok(g) => g,
                Err(m) => return fail(&m),
            };
            match sld::sld_tree(&program, &goals, depth) {
                Ok(tree) => {
                    if json {
                        println!("{}", tree.to_json());
                    } else {
                        print!("{}", tree.render());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&format!("% error: {e}")),
            }
        }
        Command::Proof { file, goal, json } => {
            let program = match load_program(&file) {
                Ok(p) => p,
                Err(m) => return fail(&m),
            };
            let (goals, _) = match parse_goal(&goal) {
                Ok(g) => g,
                Err(m) => return fail(&m),
            };
            match sld::proof_tree(&program, &goals, Strategy::DepthFirst, EngineLimits::none()) {
                Ok(Some(tree)) => {
                    if json {
                        println!("{}", tree.to_json());
                    } else {
                        print!("{}", tree.render());
                    }
                    ExitCode::SUCCESS
                }
                Ok(None) => {
                    println!("false.");
                    ExitCode::from(1)
                }
                Err(e) => fail(&format!("% error: {e}")),
            }
        }
        Command::Induce { file } => {
            let text = match read_file(&file) {
                Ok(t) => t,
                Err(m) => return fail(&m),
            };
            let task = match induce::load_ilp_task(&text, InduceBounds::default()) {
                Ok(t) => t,
                Err(e) => return fail(&format!("% error: {e}")),
            };
            match induce::induce(&task, EngineLimits::none()) {
                Ok(Some(hypothesis)) => {
                    for c in hypothesis.clauses() {
                        println!("{}", display_clause(c));
                    }
                    ExitCode::SUCCESS
                }
                Ok(None) => {
                    println!("% no consistent hypothesis within bounds");
                    ExitCode::from(1)
                }
                Err(e) => fail(&format!("% error: {e}")),
            }
        }
        Command::Abduce { file, goal } => {
            let text = match read_file(&file) {
                Ok(t) => t,
                Err(m) => return fail(&m),
            };
            let spec = match reason::load_abduction_spec(&text) {
                Ok(s) => s,
                Err(e) => return fail(&format!("% error: {e}")),
            };
            let (goals, _) = match parse_goal(&goal) {
                Ok(g) => g,
                Err(m) => return fail(&m),
            };
            match reason::abduce(&spec, &goals, EngineLimits::none()) {
                Ok(explanations) if explanations.is_empty() => {
                    println!("no explanation.");
                    ExitCode::from(1)
                }
                Ok(explanations) => {
                    for delta in &explanations {
                        if delta.is_empty() {
                            println!("explanation: (none needed)");
                        } else {
                            let atoms: Vec<String> =
                                delta.iter().map(reader::write_term_default).collect();
                            println!("explanation: {}", atoms.join(", "));
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&format!("% error: {e}")),
            }
        }
    }
}
