//! SLD resolution for definite clauses: strategy-parametric search, cut,
//! negation as failure, arithmetic, second-order collection predicates,
//! SLD-trees and proof trees.

use crate::clausal::{conjuncts, GeneralClause, Program};
use crate::reader::{write_term_default, ClauseKind, SourceClause};
use crate::term::{unify, Subst, Term, VarSupply};
use std::collections::VecDeque;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    DepthFirst,
    BreadthFirst,
    IterativeDeepening { step: u32 },
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::DepthFirst => write!(f, "dfs"),
            Strategy::BreadthFirst => write!(f, "bfs"),
            Strategy::IterativeDeepening { step } => write!(f, "id({step})"),
        }
    }
}

/// Resource limits; with both absent the engine may diverge.
#[derive(Clone, Copy, Debug, Default)]
pub struct EngineLimits {
    pub max_depth: Option<u32>,
    pub max_nodes: Option<u64>,
}

impl EngineLimits {
    pub fn none() -> EngineLimits {
        EngineLimits::default()
    }

    pub fn depth(d: u32) -> EngineLimits {
        EngineLimits {
            max_depth: Some(d),
            max_nodes: None,
        }
    }

    pub fn nodes(n: u64) -> EngineLimits {
        EngineLimits {
            max_depth: None,
            max_nodes: Some(n),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Flags {
    pub occurs_check: bool,
    pub undefined_is_error: bool,
}

impl Default for Flags {
    fn default() -> Flags {
        Flags {
            occurs_check: true,
            undefined_is_error: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("unknown predicate {name}/{arity}")]
    Undefined { name: String, arity: usize },
    #[error("instantiation error: {0}")]
    Instantiation(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("resources exhausted")]
    ResourcesExhausted,
    #[error("cut is not supported under {0} exploration")]
    CutUnsupported(String),
    #[error("clause is not definite: {0}")]
    NotDefinite(String),
}

/// A proof tree node: the instantiated atom, the clause that produced it,
/// and proofs of the body atoms. Builtins are leaves.
#[derive(Clone, Debug)]
pub struct ProofTree {
    pub atom: Term,
    pub kind: ProofKind,
    pub children: Vec<ProofTree>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofKind {
    Clause(usize),
    Builtin,
    /// Top-level conjunction wrapper.
    Root,
}

impl ProofTree {
    fn instantiate(&mut self, s: &Subst) {
        self.atom = s.apply(&self.atom);
        for c in &mut self.children {
            c.instantiate(s);
        }
    }

    /// Independently re-checks the tree against a program: every node's
    /// atom must unify with its clause head and the children must cover
    /// the clause body.
    pub fn replay(&self, p: &Program) -> bool {
        match self.kind {
            ProofKind::Root => self.children.iter().all(|c| c.replay(p)),
            ProofKind::Builtin => true,
            ProofKind::Clause(idx) => {
                let Some(clause) = p.clauses().get(idx) else {
                    return false;
                };
                let mut supply = VarSupply::new();
                let c = clause.rename_apart(&mut supply);
                let Some(theta) = unify(&c.head[0], &self.atom, true) else {
                    return false;
                };
                if c.body.len() != self.children.len() {
                    return false;
                }
                c.body.iter().zip(&self.children).all(|(b, child)| {
                    unify(&theta.apply(b), &child.atom, true).is_some() && child.replay(p)
                })
            }
        }
    }

    /// Indented text export, one node per line.
    pub fn render(&self) -> String {
        fn go(t: &ProofTree, depth: usize, out: &mut String) {
            let label = match t.kind {
                ProofKind::Clause(i) => format!("[clause {i}]"),
                ProofKind::Builtin => "[builtin]".to_string(),
                ProofKind::Root => "[query]".to_string(),
            };
            out.push_str(&format!(
                "{}{} {}\n",
                "  ".repeat(depth),
                write_term_default(&t.atom),
                label
            ));
            for c in &t.children {
                go(c, depth + 1, out);
            }
        }
        let mut out = String::new();
        go(self, 0, &mut out);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "atom": write_term_default(&self.atom),
            "kind": match self.kind {
                ProofKind::Clause(i) => format!("clause {i}"),
                ProofKind::Builtin => "builtin".to_string(),
                ProofKind::Root => "query".to_string(),
            },
            "children": self.children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Answer {
    /// Bindings restricted to the query's variables.
    pub subst: Subst,
    pub proof: ProofTree,
    /// Derivation depth of the success node.
    pub depth: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Port {
    Call,
    Exit,
    Fail,
    Redo,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::Call => write!(f, "Call"),
            Port::Exit => write!(f, "Exit"),
            Port::Fail => write!(f, "Fail"),
            Port::Redo => write!(f, "Redo"),
        }
    }
}

pub type TraceFn<'a> = &'a mut dyn FnMut(Port, u32, &Term);

/// Renders one trace line in the four-port format.
pub fn trace_line(port: Port, depth: u32, atom: &Term) -> String {
    format!("{port}: ({depth}) {}", write_term_default(atom))
}

// ---------------------------------------------------------------------
// goal items

#[derive(Clone, Debug)]
enum GoalItem {
    /// A call with the cut barrier of its enclosing body.
    Call(Term, usize),
    /// Completes the proof frame on top of the frame stack.
    PopFrame,
}

#[derive(Clone, Debug)]
struct Frame {
    atom: Term,
    kind: ProofKind,
    depth: u32,
    children: Vec<ProofTree>,
}

#[derive(Clone, Debug)]
struct Node {
    /// Remaining goals, next goal last.
    goals: Vec<GoalItem>,
    subst: Subst,
    depth: u32,
    frames: Vec<Frame>,
    /// Trace port to emit when this alternative is resumed.
    redo: Option<(u32, Term)>,
    /// SLD-tree node this search node corresponds to.
    tree_id: Option<usize>,
}

fn flatten_goal(t: &Term, barrier: usize, out: &mut Vec<GoalItem>) -> Result<(), EngineError> {
    let cs = conjuncts(t).map_err(EngineError::Type)?;
    // next goal must end up last
    for c in cs.iter().rev() {
        out.push(GoalItem::Call(c.clone(), barrier));
    }
    Ok(())
}

fn term_contains_cut(t: &Term) -> bool {
    match t {
        Term::Atom(a) => a == "!",
        Term::Compound(_, args) => args.iter().any(term_contains_cut),
        _ => false,
    }
}

pub fn program_contains_cut(p: &Program) -> bool {
    p.clauses()
        .iter()
        .any(|c| c.body.iter().any(term_contains_cut))
}

// ---------------------------------------------------------------------
// SLD trees

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeafStatus {
    Success,
    Failure,
    Pruned,
    DepthBounded,
}

#[derive(Clone, Debug)]
pub struct SldTreeNode {
    pub goal: String,
    pub depth: u32,
    pub children: Vec<usize>,
    pub status: Option<LeafStatus>,
    pub answer: Option<Subst>,
}

#[derive(Clone, Debug)]
pub struct SldTree {
    pub nodes: Vec<SldTreeNode>,
    pub root: usize,
}

impl SldTree {
    pub fn leaf_statuses(&self) -> Vec<&LeafStatus> {
        self.nodes.iter().filter_map(|n| n.status.as_ref()).collect()
    }

    /// Indented text export: one node per line, leaf status suffix.
    pub fn render(&self) -> String {
        fn go(t: &SldTree, id: usize, depth: usize, out: &mut String) {
            let n = &t.nodes[id];
            let suffix = match &n.status {
                Some(LeafStatus::Success) => " [success]",
                Some(LeafStatus::Failure) => " [failure]",
                Some(LeafStatus::Pruned) => " [pruned]",
                Some(LeafStatus::DepthBounded) => " [depth-bounded]",
                None => "",
            };
            out.push_str(&format!("{}{}{}\n", "  ".repeat(depth), n.goal, suffix));
            for &c in &n.children {
                go(t, c, depth + 1, out);
            }
        }
        let mut out = String::new();
        go(self, self.root, 0, &mut out);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        fn go(t: &SldTree, id: usize) -> serde_json::Value {
            let n = &t.nodes[id];
            serde_json::json!({
                "goal": n.goal,
                "depth": n.depth,
                "status": n.status.as_ref().map(|s| format!("{s:?}").to_lowercase()),
                "children": n.children.iter().map(|&c| go(t, c)).collect::<Vec<_>>(),
            })
        }
        go(self, self.root)
    }
}

#[derive(Default)]
struct TreeBuilder {
    nodes: Vec<SldTreeNode>,
}

impl TreeBuilder {
    fn add(&mut self, parent: Option<usize>, goal: String, depth: u32) -> usize {
        let id = self.nodes.len();
        self.nodes.push(SldTreeNode {
            goal,
            depth,
            children: Vec::new(),
            status: None,
            answer: None,
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        id
    }

    fn mark(&mut self, id: usize, status: LeafStatus) {
        self.nodes[id].status = Some(status);
    }
}

fn render_goals(goals: &[GoalItem], subst: &Subst) -> String {
    let calls: Vec<String> = goals
        .iter()
        .rev()
        .filter_map(|g| match g {
            GoalItem::Call(t, _) => Some(write_term_default(&subst.apply(t))),
            GoalItem::PopFrame => None,
        })
        .collect();
    if calls.is_empty() {
        "[]".to_string()
    } else {
        format!(":- {}", calls.join(", "))
    }
}

// ---------------------------------------------------------------------
// the solver

enum Processed {
    Answer(Answer),
    Failed,
    Error(EngineError),
}

/// A resumable answer stream. Normal exhaustion ends the iterator; hitting
/// a resource limit ends it with a final `ResourcesExhausted` error, which
/// is how callers tell "no more answers" from "gave up".
pub struct Solver<'a> {
    program: &'a Program,
    strategy: Strategy,
    limits: EngineLimits,
    flags: Flags,
    supply: &'a mut VarSupply,
    query_vars: Vec<String>,
    stack: Vec<Node>,
    queue: VecDeque<Node>,
    expansions: u64,
    clipped: bool,
    finished: bool,
    errored: bool,
    // iterative deepening state
    id_cap: u32,
    id_prev_cap: u32,
    id_template: Option<Node>,
    trace: Option<TraceFn<'a>>,
    tree: Option<TreeBuilder>,
}

impl<'a> Solver<'a> {
    pub fn new(
        program: &'a Program,
        goal: &[Term],
        strategy: Strategy,
        limits: EngineLimits,
        flags: Flags,
        supply: &'a mut VarSupply,
    ) -> Result<Solver<'a>, EngineError> {
        if strategy != Strategy::DepthFirst
            && (program_contains_cut(program) || goal.iter().any(term_contains_cut))
        {
            return Err(EngineError::CutUnsupported(strategy.to_string()));
        }
        let mut query_vars = Vec::new();
        for g in goal {
            for v in g.variables() {
                if !query_vars.contains(&v) {
                    query_vars.push(v);
                }
            }
        }
        let goal_conj = goal.to_vec();
        let mut goals = Vec::new();
        for g in goal_conj.iter().rev() {
            goals.push(GoalItem::Call(g.clone(), 0));
        }
        let root_atom = match goal.len() {
            1 => goal[0].clone(),
            _ => Term::list(goal.to_vec()),
        };
        let root = Node {
            goals,
            subst: Subst::new(),
            depth: 0,
            frames: vec![Frame {
                atom: root_atom,
                kind: ProofKind::Root,
                depth: 0,
                children: Vec::new(),
            }],
            redo: None,
            tree_id: None,
        };
        let mut solver = Solver {
            program,
            strategy,
            limits,
            flags,
            supply,
            query_vars,
            stack: Vec::new(),
            queue: VecDeque::new(),
            expansions: 0,
            clipped: false,
            finished: false,
            errored: false,
            id_cap: 0,
            id_prev_cap: 0,
            id_template: None,
            trace: None,
            tree: None,
        };
        match strategy {
            Strategy::DepthFirst => solver.stack.push(root),
            Strategy::BreadthFirst => solver.queue.push_back(root),
            Strategy::IterativeDeepening { step } => {
                solver.id_cap = step;
                solver.id_template = Some(root.clone());
                solver.stack.push(root);
            }
        }
        Ok(solver)
    }

    pub fn with_trace(mut self, trace: TraceFn<'a>) -> Solver<'a> {
        self.trace = Some(trace);
        self
    }

    fn with_tree(mut self) -> Solver<'a> {
        let mut tb = TreeBuilder::default();
        let root = &mut self.stack[0];
        let goal = render_goals(&root.goals, &root.subst);
        let id = tb.add(None, goal, 0);
        root.tree_id = Some(id);
        self.tree = Some(tb);
        self
    }

    fn emit(&mut self, port: Port, depth: u32, atom: &Term) {
        if let Some(t) = self.trace.as_mut() {
            t(port, depth, atom);
        }
    }

    fn depth_cap(&self) -> Option<u32> {
        match self.strategy {
            Strategy::IterativeDeepening { .. } => match self.limits.max_depth {
                Some(d) => Some(d.min(self.id_cap)),
                None => Some(self.id_cap),
            },
            _ => self.limits.max_depth,
        }
    }

    fn make_answer(&self, node: &Node) -> Answer {
        let mut frames = node.frames.clone();
        debug_assert_eq!(frames.len(), 1);
        let root_frame = frames.pop().unwrap();
        let mut proof = ProofTree {
            atom: root_frame.atom,
            kind: ProofKind::Root,
            children: root_frame.children,
        };
        proof.instantiate(&node.subst);
        Answer {
            subst: node.subst.restrict(&self.query_vars),
            proof,
            depth: node.depth,
        }
    }

    /// Runs one node to an answer, a failure, or an expansion (children
    /// pushed to the active container).
    fn process(&mut self, mut node: Node) -> Option<Processed> {
        if let Some((d, atom)) = node.redo.take() {
            self.emit(Port::Redo, d, &atom);
        }
        loop {
            let item = match node.goals.pop() {
                None => {
                    if let (Some(tb), Some(id)) = (self.tree.as_mut(), node.tree_id) {
                        tb.mark(id, LeafStatus::Success);
                        tb.nodes[id].answer = Some(node.subst.restrict(&self.query_vars));
                    }
                    return Some(Processed::Answer(self.make_answer(&node)));
                }
                Some(item) => item,
            };
            match item {
                GoalItem::PopFrame => {
                    let frame = node.frames.pop().expect("frame underflow");
                    let atom = node.subst.apply(&frame.atom);
                    self.emit(Port::Exit, frame.depth, &atom);
                    let tree = ProofTree {
                        atom: frame.atom,
                        kind: frame.kind,
                        children: frame.children,
                    };
                    node.frames
                        .last_mut()
                        .expect("root frame missing")
                        .children
                        .push(tree);
                }
                GoalItem::Call(raw, barrier) => {
                    let goal = node.subst.apply(&raw);
                    match self.step_call(&mut node, goal, barrier) {
                        StepResult::Continue => {}
                        StepResult::Fail => {
                            if let (Some(tb), Some(id)) = (self.tree.as_mut(), node.tree_id) {
                                if tb.nodes[id].status.is_none() {
                                    tb.mark(id, LeafStatus::Failure);
                                }
                            }
                            return Some(Processed::Failed);
                        }
                        StepResult::Expanded => return None,
                        StepResult::Error(e) => return Some(Processed::Error(e)),
                        StepResult::Clipped => {
                            self.clipped = true;
                            if let (Some(tb), Some(id)) = (self.tree.as_mut(), node.tree_id) {
                                tb.mark(id, LeafStatus::DepthBounded);
                            }
                            return Some(Processed::Failed);
                        }
                    }
                }
            }
        }
    }

    fn push_children(&mut self, children: Vec<Node>) {
        match self.strategy {
            Strategy::BreadthFirst => {
                for c in children {
                    self.queue.push_back(c);
                }
            }
            _ => {
                for c in children.into_iter().rev() {
                    self.stack.push(c);
                }
            }
        }
    }

    fn step_call(&mut self, node: &mut Node, goal: Term, barrier: usize) -> StepResult {
        let (name, arity) = match goal.functor() {
            Some(f) => (f.0.to_string(), f.1),
            None => {
                return StepResult::Error(EngineError::Type(format!(
                    "callable expected, found {goal}"
                )))
            }
        };
        match (name.as_str(), arity) {
            ("true", 0) => StepResult::Continue,
            ("fail", 0) | ("false", 0) => StepResult::Fail,
            ("!", 0) => {
                // commit to everything decided since the barrier
                if self.strategy == Strategy::DepthFirst
                    || matches!(self.strategy, Strategy::IterativeDeepening { .. })
                {
                    while self.stack.len() > barrier {
                        let pruned = self.stack.pop().unwrap();
                        if let (Some(tb), Some(id)) = (self.tree.as_mut(), pruned.tree_id) {
                            tb.mark(id, LeafStatus::Pruned);
                        }
                    }
                }
                self.builtin_proof(node, &goal);
                StepResult::Continue
            }
            ("=", 2) => self.builtin_unify(node, &goal, true),
            ("\\=", 2) => self.builtin_unify(node, &goal, false),
            ("==", 2) | ("\\==", 2) => {
                let args = compound_args(&goal);
                let eq = args[0] == args[1];
                let want = name == "==";
                if eq == want {
                    self.builtin_proof(node, &goal);
                    StepResult::Continue
                } else {
                    StepResult::Fail
                }
            }
            ("is", 2) => {
                let args = compound_args(&goal);
                match eval_arith(&args[1]) {
                    Ok(v) => self.unify_into(node, &args[0], &Term::Int(v), &goal),
                    Err(e) => StepResult::Error(e),
                }
            }
            ("<", 2) | (">", 2) | ("=<", 2) | (">=", 2) | ("=:=", 2) | ("=\\=", 2) => {
                let args = compound_args(&goal);
                let l = match eval_arith(&args[0]) {
                    Ok(v) => v,
                    Err(e) => return StepResult::Error(e),
                };
                let r = match eval_arith(&args[1]) {
                    Ok(v) => v,
                    Err(e) => return StepResult::Error(e),
                };
                let ok = match name.as_str() {
                    "<" => l < r,
                    ">" => l > r,
                    "=<" => l <= r,
                    ">=" => l >= r,
                    "=:=" => l == r,
                    _ => l != r,
                };
                if ok {
                    self.builtin_proof(node, &goal);
                    StepResult::Continue
                } else {
                    StepResult::Fail
                }
            }
            ("\\+", 1) => {
                let args = compound_args(&goal);
                match self.solve_naf(&args[0]) {
                    Ok(true) => {
                        self.builtin_proof(node, &goal);
                        StepResult::Continue
                    }
                    Ok(false) => StepResult::Fail,
                    Err(e) => StepResult::Error(e),
                }
            }
            ("call", 1) => {
                let args = compound_args(&goal);
                let new_barrier = self.stack.len();
                let mut items = Vec::new();
                if let Err(e) = flatten_goal(&args[0], new_barrier, &mut items) {
                    return StepResult::Error(e);
                }
                // keep ordering: items for the inner goal go on top
                let mut rest = std::mem::take(&mut node.goals);
                rest.extend(items);
                node.goals = rest;
                StepResult::Continue
            }
            (";", 2) => {
                let args = compound_args(&goal);
                let mut children = Vec::new();
                for (i, branch) in args.iter().enumerate() {
                    let mut child = node.clone();
                    if let Err(e) = flatten_goal(branch, barrier, &mut child.goals) {
                        return StepResult::Error(e);
                    }
                    if i > 0 {
                        child.redo = Some((node.depth, goal.clone()));
                    }
                    if let (Some(tb), Some(pid)) = (self.tree.as_mut(), node.tree_id) {
                        let label = render_goals(&child.goals, &child.subst);
                        child.tree_id = Some(tb.add(Some(pid), label, node.depth));
                    }
                    children.push(child);
                }
                self.push_children(children);
                StepResult::Expanded
            }
            ("findall", 3) | ("bagof", 3) | ("setof", 3) => {
                self.builtin_collect(node, &name, &goal)
            }
            _ => self.expand_user_call(node, goal, name, arity),
        }
    }

    fn builtin_proof(&mut self, node: &mut Node, goal: &Term) {
        node.frames
            .last_mut()
            .expect("root frame missing")
            .children
            .push(ProofTree {
                atom: goal.clone(),
                kind: ProofKind::Builtin,
                children: Vec::new(),
            });
    }

    fn builtin_unify(&mut self, node: &mut Node, goal: &Term, positive: bool) -> StepResult {
        let args = compound_args(goal);
        match unify(&args[0], &args[1], self.flags.occurs_check) {
            Some(theta) => {
                if positive {
                    node.subst = node.subst.compose(&theta);
                    self.builtin_proof(node, goal);
                    StepResult::Continue
                } else {
                    StepResult::Fail
                }
            }
            None => {
                if positive {
                    StepResult::Fail
                } else {
                    self.builtin_proof(node, goal);
                    StepResult::Continue
                }
            }
        }
    }

    fn unify_into(&mut self, node: &mut Node, a: &Term, b: &Term, goal: &Term) -> StepResult {
        match unify(a, b, self.flags.occurs_check) {
            Some(theta) => {
                node.subst = node.subst.compose(&theta);
                self.builtin_proof(node, goal);
                StepResult::Continue
            }
            None => StepResult::Fail,
        }
    }

    fn solve_naf(&mut self, goal: &Term) -> Result<bool, EngineError> {
        if !goal.is_ground() {
            return Err(EngineError::Instantiation(format!(
                "\\+ requires a ground goal, got {goal}"
            )));
        }
        let goals = conjuncts(goal).map_err(EngineError::Type)?;
        let mut sub = Solver::new(
            self.program,
            &goals,
            // cut inside a naf goal is confined to it under DFS; other
            // strategies have already rejected cut programs
            Strategy::DepthFirst,
            self.limits,
            self.flags,
            self.supply,
        )?;
        match sub.next() {
            Some(Ok(_)) => Ok(false),
            Some(Err(e)) => Err(e),
            None => Ok(true),
        }
    }

    fn run_all(&mut self, goal: &Term) -> Result<Vec<Subst>, EngineError> {
        let goals = conjuncts(goal).map_err(EngineError::Type)?;
        let mut vars = Vec::new();
        for g in &goals {
            for v in g.variables() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        let mut sub = Solver::new(
            self.program,
            &goals,
            Strategy::DepthFirst,
            self.limits,
            self.flags,
            self.supply,
        )?;
        let mut out = Vec::new();
        loop {
            match sub.next() {
                Some(Ok(a)) => out.push(a.subst),
                Some(Err(e)) => return Err(e),
                None => break,
            }
        }
        Ok(out)
    }

    fn builtin_collect(&mut self, node: &mut Node, kind: &str, goal: &Term) -> StepResult {
        let args = compound_args(goal);
        let (template, inner, out_arg) = (&args[0], &args[1], &args[2]);
        let solutions = match self.run_all(inner) {
            Ok(s) => s,
            Err(e) => return StepResult::Error(e),
        };
        if kind == "findall" {
            let items: Vec<Term> = solutions.iter().map(|s| s.apply(template)).collect();
            return self.unify_into(node, out_arg, &Term::list(items), goal);
        }
        // bagof/setof: group by the free variables of the goal that do not
        // occur in the template (no ^ witness operator)
        if solutions.is_empty() {
            return StepResult::Fail;
        }
        let tmpl_vars = template.variables();
        let free: Vec<String> = inner
            .variables()
            .into_iter()
            .filter(|v| !tmpl_vars.contains(v))
            .collect();
        let free_tuple = Term::list(free.iter().map(|v| Term::Var(v.clone())).collect());
        let mut groups: Vec<(Term, Vec<Term>)> = Vec::new();
        for s in &solutions {
            let witness = s.apply(&free_tuple);
            let item = s.apply(template);
            match groups.iter_mut().find(|(w, _)| *w == witness) {
                Some((_, items)) => items.push(item),
                None => groups.push((witness, vec![item])),
            }
        }
        let mut children = Vec::new();
        for (i, (witness, mut items)) in groups.into_iter().enumerate() {
            if kind == "setof" {
                items.sort_by(|a, b| a.std_cmp(b));
                items.dedup();
            }
            let mut child = node.clone();
            child
                .goals
                .push(GoalItem::Call(Term::comp("=", vec![out_arg.clone(), Term::list(items)]), 0));
            child.goals.push(GoalItem::Call(
                Term::comp("=", vec![free_tuple.clone(), witness]),
                0,
            ));
            if i > 0 {
                child.redo = Some((node.depth, goal.clone()));
            }
            children.push(child);
        }
        self.builtin_proof(node, goal);
        self.push_children(children);
        StepResult::Expanded
    }

    fn expand_user_call(
        &mut self,
        node: &mut Node,
        goal: Term,
        name: String,
        arity: usize,
    ) -> StepResult {
        if let Some(cap) = self.depth_cap() {
            if node.depth + 1 > cap {
                return StepResult::Clipped;
            }
        }
        self.expansions += 1;
        if let Some(max) = self.limits.max_nodes {
            if self.expansions > max {
                return StepResult::Error(EngineError::ResourcesExhausted);
            }
        }
        let positions: Vec<usize> = self.program.matching(&name, arity).to_vec();
        if positions.is_empty() {
            if self.flags.undefined_is_error && !self.program.defines(&name, arity) {
                return StepResult::Error(EngineError::Undefined { name, arity });
            }
            self.emit(Port::Call, node.depth + 1, &goal);
            self.emit(Port::Fail, node.depth + 1, &goal);
            return StepResult::Fail;
        }
        self.emit(Port::Call, node.depth + 1, &goal);
        let barrier = self.stack.len();
        let mut children = Vec::new();
        for &idx in &positions {
            let clause = self.program.clauses()[idx].rename_apart(self.supply);
            let tree_child = if let (Some(tb), Some(pid)) = (self.tree.as_mut(), node.tree_id) {
                Some((tb as *mut TreeBuilder, pid))
            } else {
                None
            };
            match unify(&goal, &clause.head[0], self.flags.occurs_check) {
                Some(theta) => {
                    let mut child = node.clone();
                    child.subst = node.subst.compose(&theta);
                    child.depth = node.depth + 1;
                    child.frames.push(Frame {
                        atom: goal.clone(),
                        kind: ProofKind::Clause(idx),
                        depth: child.depth,
                        children: Vec::new(),
                    });
                    child.goals.push(GoalItem::PopFrame);
                    for b in clause.body.iter().rev() {
                        child.goals.push(GoalItem::Call(b.clone(), barrier));
                    }
                    if !children.is_empty() {
                        child.redo = Some((child.depth, goal.clone()));
                    }
                    if let Some(tb) = self.tree.as_mut() {
                        if let Some(pid) = node.tree_id {
                            let label = render_goals(&child.goals, &child.subst);
                            child.tree_id = Some(tb.add(Some(pid), label, child.depth));
                        }
                    }
                    let _ = tree_child;
                    children.push(child);
                }
                None => {
                    // head mismatch: record a failure leaf in the tree
                    if let Some(tb) = self.tree.as_mut() {
                        if let Some(pid) = node.tree_id {
                            let id = tb.add(
                                Some(pid),
                                format!("{} = {}", write_term_default(&goal), clause.head[0]),
                                node.depth + 1,
                            );
                            tb.mark(id, LeafStatus::Failure);
                        }
                    }
                }
            }
        }
        if children.is_empty() {
            self.emit(Port::Fail, node.depth + 1, &goal);
            return StepResult::Fail;
        }
        self.push_children(children);
        StepResult::Expanded
    }

    fn next_node(&mut self) -> Option<Node> {
        match self.strategy {
            Strategy::BreadthFirst => self.queue.pop_front(),
            _ => self.stack.pop(),
        }
    }

    fn end_of_space(&mut self) -> Option<Result<Answer, EngineError>> {
        // iterative deepening: restart with a deeper cap while the last
        // sweep was clipped
        if let Strategy::IterativeDeepening { step } = self.strategy {
            if self.clipped {
                if let Some(max) = self.limits.max_depth {
                    if self.id_cap >= max {
                        self.finished = true;
                        self.errored = true;
                        return Some(Err(EngineError::ResourcesExhausted));
                    }
                }
                self.id_prev_cap = self.id_cap;
                self.id_cap += step;
                self.clipped = false;
                let root = self.id_template.clone().expect("id template");
                self.stack.clear();
                self.stack.push(root);
                return self.pump();
            }
        }
        self.finished = true;
        if self.clipped {
            self.errored = true;
            return Some(Err(EngineError::ResourcesExhausted));
        }
        None
    }

    fn pump(&mut self) -> Option<Result<Answer, EngineError>> {
        loop {
            let node = match self.next_node() {
                Some(n) => n,
                None => return self.end_of_space(),
            };
            match self.process(node) {
                Some(Processed::Answer(a)) => {
                    // under iterative deepening, an answer shallower than
                    // the previous cap was already reported
                    if matches!(self.strategy, Strategy::IterativeDeepening { .. })
                        && a.depth <= self.id_prev_cap
                    {
                        continue;
                    }
                    return Some(Ok(a));
                }
                Some(Processed::Failed) => continue,
                Some(Processed::Error(e)) => {
                    self.finished = true;
                    self.errored = true;
                    return Some(Err(e));
                }
                None => continue,
            }
        }
    }
}

impl<'a> Iterator for Solver<'a> {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        self.pump()
    }
}

enum StepResult {
    Continue,
    Fail,
    Expanded,
    Clipped,
    Error(EngineError),
}

fn compound_args(t: &Term) -> Vec<Term> {
    match t {
        Term::Compound(_, args) => args.clone(),
        _ => Vec::new(),
    }
}

// ---------------------------------------------------------------------
// public operations

/// Answers to `goal` under the given strategy; see `Solver` for the
/// stream contract.
pub fn solve<'a>(
    program: &'a Program,
    goal: &[Term],
    strategy: Strategy,
    limits: EngineLimits,
    flags: Flags,
    supply: &'a mut VarSupply,
) -> Result<Solver<'a>, EngineError> {
    Solver::new(program, goal, strategy, limits, flags, supply)
}

/// Convenience: all answers, erroring out on resource exhaustion.
pub fn solve_all(
    program: &Program,
    goal: &[Term],
    strategy: Strategy,
    limits: EngineLimits,
    flags: Flags,
) -> Result<Vec<Answer>, EngineError> {
    let mut supply = VarSupply::new();
    let solver = Solver::new(program, goal, strategy, limits, flags, &mut supply)?;
    let mut out = Vec::new();
    for a in solver {
        out.push(a?);
    }
    Ok(out)
}

/// The complete SLD-tree of `goal` to `max_depth`, leaves labeled
/// success/failure/pruned/depth-bounded; subtrees cut away are kept as
/// pruned stubs.
pub fn sld_tree(program: &Program, goal: &[Term], max_depth: u32) -> Result<SldTree, EngineError> {
    let mut supply = VarSupply::new();
    let mut solver = Solver::new(
        program,
        goal,
        Strategy::DepthFirst,
        EngineLimits::depth(max_depth),
        Flags {
            undefined_is_error: false,
            ..Flags::default()
        },
        &mut supply,
    )?
    .with_tree();
    loop {
        match solver.next() {
            Some(Ok(_)) => continue,
            Some(Err(EngineError::ResourcesExhausted)) | None => break,
            Some(Err(e)) => return Err(e),
        }
    }
    let tb = solver.tree.take().expect("tree builder");
    Ok(SldTree {
        nodes: tb.nodes,
        root: 0,
    })
}

/// Evaluates a ground arithmetic expression over integers; `//` is floor
/// division, paired with `mod` so that `E = (E // D) * D + (E mod D)`.
pub fn eval_arith(e: &Term) -> Result<i64, EngineError> {
    match e {
        Term::Int(v) => Ok(*v),
        Term::Var(v) => Err(EngineError::Instantiation(format!(
            "unbound variable {v} in arithmetic"
        ))),
        Term::Atom(a) => Err(EngineError::Type(format!(
            "atom {a} is not an arithmetic expression"
        ))),
        Term::Compound(f, args) => {
            let bin = |op: fn(i64, i64) -> Result<i64, EngineError>| -> Result<i64, EngineError> {
                op(eval_arith(&args[0])?, eval_arith(&args[1])?)
            };
            match (f.as_str(), args.len()) {
                ("+", 2) => bin(|a, b| Ok(a.wrapping_add(b))),
                ("-", 2) => bin(|a, b| Ok(a.wrapping_sub(b))),
                ("*", 2) => bin(|a, b| Ok(a.wrapping_mul(b))),
                ("//", 2) => bin(|a, b| {
                    if b == 0 {
                        Err(EngineError::Evaluation("division by zero".into()))
                    } else {
                        Ok(floor_div(a, b))
                    }
                }),
                ("mod", 2) => bin(|a, b| {
                    if b == 0 {
                        Err(EngineError::Evaluation("division by zero".into()))
                    } else {
                        Ok(a - floor_div(a, b) * b)
                    }
                }),
                ("-", 1) => Ok(-eval_arith(&args[0])?),
                _ => Err(EngineError::Type(format!(
                    "unknown arithmetic functor {f}/{}",
                    args.len()
                ))),
            }
        }
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a % b < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CollectKind {
    FindAll,
    BagOf,
    SetOf,
}

/// Standalone collection: findall returns the (possibly empty) answer
/// list; bagof and setof fail on no solutions and use the first witness
/// group for their free variables.
pub fn collect(
    program: &Program,
    kind: CollectKind,
    template: &Term,
    goal: &[Term],
    limits: EngineLimits,
) -> Result<Option<Term>, EngineError> {
    let answers = solve_all(program, goal, Strategy::DepthFirst, limits, Flags::default())?;
    let mut items: Vec<Term> = answers.iter().map(|a| a.subst.apply(template)).collect();
    match kind {
        CollectKind::FindAll => Ok(Some(Term::list(items))),
        CollectKind::BagOf | CollectKind::SetOf => {
            if items.is_empty() {
                return Ok(None);
            }
            let tmpl_vars = template.variables();
            let mut free = Vec::new();
            for g in goal {
                for v in g.variables() {
                    if !tmpl_vars.contains(&v) && !free.contains(&v) {
                        free.push(v);
                    }
                }
            }
            if !free.is_empty() {
                // keep only the first witness group
                let tuple = Term::list(free.iter().map(|v| Term::Var(v.clone())).collect());
                let first = answers[0].subst.apply(&tuple);
                items = answers
                    .iter()
                    .filter(|a| a.subst.apply(&tuple) == first)
                    .map(|a| a.subst.apply(template))
                    .collect();
            }
            if kind == CollectKind::SetOf {
                items.sort_by(|a, b| a.std_cmp(b));
                items.dedup();
            }
            Ok(Some(Term::list(items)))
        }
    }
}

/// Negation as failure on a ground goal: succeeds iff the goal finitely
/// fails. Resource exhaustion inside the goal is an error, not an answer.
pub fn naf(
    program: &Program,
    goal: &[Term],
    strategy: Strategy,
    limits: EngineLimits,
) -> Result<bool, EngineError> {
    for g in goal {
        if !g.is_ground() {
            return Err(EngineError::Instantiation(format!(
                "\\+ requires a ground goal, got {g}"
            )));
        }
    }
    let mut supply = VarSupply::new();
    let mut solver = Solver::new(program, goal, strategy, limits, Flags::default(), &mut supply)?;
    match solver.next() {
        Some(Ok(_)) => Ok(false),
        Some(Err(e)) => Err(e),
        None => Ok(true),
    }
}

/// Proof tree of the first answer, if any.
pub fn proof_tree(
    program: &Program,
    goal: &[Term],
    strategy: Strategy,
    limits: EngineLimits,
) -> Result<Option<ProofTree>, EngineError> {
    let mut supply = VarSupply::new();
    let mut solver = Solver::new(program, goal, strategy, limits, Flags::default(), &mut supply)?;
    match solver.next() {
        Some(Ok(a)) => {
            // a single-goal query reads better without the wrapper node
            if a.proof.children.len() == 1 && goal.len() == 1 {
                Ok(Some(a.proof.children.into_iter().next().unwrap()))
            } else {
                Ok(Some(a.proof))
            }
        }
        Some(Err(EngineError::ResourcesExhausted)) => Err(EngineError::ResourcesExhausted),
        Some(Err(e)) => Err(e),
        None => Ok(None),
    }
}

/// Appends source clauses to a program. DCG rules are translated first;
/// non-definite clauses are rejected with a pointer to the full-clausal
/// interpreter.
pub fn consult(program: &Program, clauses: &[SourceClause]) -> Result<Program, EngineError> {
    let mut out = program.clone();
    for sc in clauses {
        match sc.kind {
            ClauseKind::Clause => {
                let gc = GeneralClause::from_term(&sc.term).map_err(EngineError::Type)?;
                if !gc.is_definite() {
                    return Err(EngineError::NotDefinite(format!(
                        "{gc} (use the full-clausal interpreter for disjunctive heads)"
                    )));
                }
                out.push(gc);
            }
            ClauseKind::DcgRule => {
                let rule = crate::lang::GrammarRule::from_term(&sc.term)
                    .map_err(EngineError::Type)?;
                let mut supply = VarSupply::new();
                out.push(crate::lang::dcg_translate(&rule, &mut supply));
            }
            ClauseKind::Directive | ClauseKind::Query => {
                return Err(EngineError::Type(format!(
                    "cannot consult a {:?} as a clause",
                    sc.kind
                )))
            }
        }
    }
    Ok(out)
}

/// Renders one answer in the fixed output format: `X = f(a), Y = b`,
/// `true.` for a variable-free success.
pub fn format_answer(subst: &Subst, query_vars: &[String]) -> String {
    let shown: Vec<String> = query_vars
        .iter()
        .filter_map(|v| {
            subst
                .get(v)
                .map(|t| format!("{v} = {}", write_term_default(t)))
        })
        .collect();
    if shown.is_empty() {
        "true.".to_string()
    } else {
        shown.join(", ")
    }
}
