//! Search over abstract state spaces: depth-first, breadth-first,
//! iterative deepening, greedy best-first, A*, beam search and
//! hill-climbing, with instrumentation, plus an adapter exposing SLD
//! derivations as a search problem.

use crate::clausal::Program;
use crate::sld;
use crate::term::{unify, Subst, Term, VarSupply};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;

/// An abstract state space. Successor enumeration must be effect-free;
/// `key` gives the hashable identity used by closed sets.
pub trait SearchProblem {
    type State: Clone;

    fn start(&self) -> Self::State;
    fn is_goal(&self, s: &Self::State) -> bool;
    /// Ordered successors with non-negative step costs.
    fn successors(&self, s: &Self::State) -> Vec<(Self::State, i64)>;
    fn heuristic(&self, _s: &Self::State) -> i64 {
        0
    }
    fn key(&self, s: &Self::State) -> String;
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CyclePolicy {
    None,
    PathCheck,
    ClosedSet,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Defaults per strategy when absent: path-check for depth-first and
    /// iterative deepening, closed-set for breadth-first and best-first.
    pub cycle_policy: Option<CyclePolicy>,
    pub max_expanded: Option<u64>,
    pub beam_width: usize,
    pub id_step: u32,
}

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions {
            cycle_policy: None,
            max_expanded: None,
            beam_width: 2,
            id_step: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub max_frontier: u64,
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "expanded={} generated={} frontier={}",
            self.expanded, self.generated, self.max_frontier
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<S> {
    Found { path: Vec<S>, cost: i64 },
    Exhausted,
    BudgetExceeded,
}

#[derive(Clone, Debug)]
pub struct SearchResult<S> {
    pub outcome: Outcome<S>,
    pub stats: SearchStats,
}

impl<S> SearchResult<S> {
    pub fn found(&self) -> Option<(&[S], i64)> {
        match &self.outcome {
            Outcome::Found { path, cost } => Some((path, *cost)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UninformedKind {
    DepthFirst,
    BreadthFirst,
    IterativeDeepening,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BestFirstKind {
    Greedy,
    AStar,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LocalKind {
    Beam,
    HillClimb,
}

#[derive(Clone)]
struct PathNode<S> {
    state: S,
    path: Vec<S>,
    keys: Vec<String>,
    cost: i64,
}

fn child<S: Clone, P: SearchProblem<State = S>>(
    p: &P,
    parent: &PathNode<S>,
    s: S,
    step: i64,
) -> PathNode<S> {
    let mut path = parent.path.clone();
    path.push(s.clone());
    let mut keys = parent.keys.clone();
    keys.push(p.key(&s));
    PathNode {
        state: s,
        path,
        keys,
        cost: parent.cost + step,
    }
}

fn root_node<S: Clone, P: SearchProblem<State = S>>(p: &P) -> PathNode<S> {
    let s = p.start();
    PathNode {
        keys: vec![p.key(&s)],
        path: vec![s.clone()],
        state: s,
        cost: 0,
    }
}

pub fn uninformed_search<P: SearchProblem>(
    p: &P,
    kind: UninformedKind,
    opts: SearchOptions,
) -> SearchResult<P::State> {
    match kind {
        UninformedKind::DepthFirst => {
            let policy = opts.cycle_policy.unwrap_or(CyclePolicy::PathCheck);
            let mut stats = SearchStats::default();
            match dfs_limited(p, policy, opts.max_expanded, None, &mut stats) {
                DfsOutcome::Found(path, cost) => SearchResult {
                    outcome: Outcome::Found { path, cost },
                    stats,
                },
                DfsOutcome::Budget => SearchResult {
                    outcome: Outcome::BudgetExceeded,
                    stats,
                },
                DfsOutcome::Exhausted { .. } => SearchResult {
                    outcome: Outcome::Exhausted,
                    stats,
                },
            }
        }
        UninformedKind::BreadthFirst => breadth_first(p, opts),
        UninformedKind::IterativeDeepening => {
            let policy = opts.cycle_policy.unwrap_or(CyclePolicy::PathCheck);
            let mut stats = SearchStats::default();
            let mut limit = opts.id_step.max(1);
            loop {
                match dfs_limited(p, policy, opts.max_expanded, Some(limit), &mut stats) {
                    DfsOutcome::Found(path, cost) => {
                        return SearchResult {
                            outcome: Outcome::Found { path, cost },
                            stats,
                        }
                    }
                    DfsOutcome::Budget => {
                        return SearchResult {
                            outcome: Outcome::BudgetExceeded,
                            stats,
                        }
                    }
                    DfsOutcome::Exhausted { clipped } => {
                        if !clipped {
                            return SearchResult {
                                outcome: Outcome::Exhausted,
                                stats,
                            };
                        }
                        limit += opts.id_step.max(1);
                    }
                }
            }
        }
    }
}

enum DfsOutcome<S> {
    Found(Vec<S>, i64),
    Exhausted { clipped: bool },
    Budget,
}

fn dfs_limited<P: SearchProblem>(
    p: &P,
    policy: CyclePolicy,
    max_expanded: Option<u64>,
    depth_limit: Option<u32>,
    stats: &mut SearchStats,
) -> DfsOutcome<P::State> {
    let mut stack = vec![root_node(p)];
    let mut closed: HashSet<String> = HashSet::new();
    let mut clipped = false;
    stats.generated += 1;
    stats.max_frontier = stats.max_frontier.max(stack.len() as u64);
    while let Some(node) = stack.pop() {
        if p.is_goal(&node.state) {
            // the goal node counts as taken off the frontier
            stats.expanded += 1;
            return DfsOutcome::Found(node.path, node.cost);
        }
        if let Some(limit) = depth_limit {
            if node.path.len() as u32 > limit {
                clipped = true;
                continue;
            }
        }
        if policy == CyclePolicy::ClosedSet && !closed.insert(node.keys.last().unwrap().clone()) {
            continue;
        }
        if let Some(max) = max_expanded {
            if stats.expanded >= max {
                return DfsOutcome::Budget;
            }
        }
        stats.expanded += 1;
        let succs = p.successors(&node.state);
        // push in reverse so the first successor is explored first
        for (s, c) in succs.into_iter().rev() {
            let k = p.key(&s);
            if policy == CyclePolicy::PathCheck && node.keys.contains(&k) {
                continue;
            }
            stats.generated += 1;
            stack.push(child(p, &node, s, c));
        }
        stats.max_frontier = stats.max_frontier.max(stack.len() as u64);
    }
    DfsOutcome::Exhausted { clipped }
}

fn breadth_first<P: SearchProblem>(p: &P, opts: SearchOptions) -> SearchResult<P::State> {
    let policy = opts.cycle_policy.unwrap_or(CyclePolicy::ClosedSet);
    let mut stats = SearchStats::default();
    let mut queue = VecDeque::new();
    let mut closed: HashSet<String> = HashSet::new();
    queue.push_back(root_node(p));
    stats.generated += 1;
    stats.max_frontier = 1;
    while let Some(node) = queue.pop_front() {
        if p.is_goal(&node.state) {
            stats.expanded += 1;
            return SearchResult {
                outcome: Outcome::Found {
                    path: node.path,
                    cost: node.cost,
                },
                stats,
            };
        }
        if policy == CyclePolicy::ClosedSet && !closed.insert(node.keys.last().unwrap().clone()) {
            continue;
        }
        if let Some(max) = opts.max_expanded {
            if stats.expanded >= max {
                return SearchResult {
                    outcome: Outcome::BudgetExceeded,
                    stats,
                };
            }
        }
        stats.expanded += 1;
        for (s, c) in p.successors(&node.state) {
            let k = p.key(&s);
            match policy {
                CyclePolicy::PathCheck if node.keys.contains(&k) => continue,
                CyclePolicy::ClosedSet if closed.contains(&k) => continue,
                _ => {}
            }
            stats.generated += 1;
            queue.push_back(child(p, &node, s, c));
        }
        stats.max_frontier = stats.max_frontier.max(queue.len() as u64);
    }
    SearchResult {
        outcome: Outcome::Exhausted,
        stats,
    }
}

/// Greedy best-first (priority h) or A* (priority g+h). Ties break FIFO;
/// closed states are reopened when reached with strictly smaller g.
pub fn best_first<P: SearchProblem>(
    p: &P,
    kind: BestFirstKind,
    opts: SearchOptions,
) -> SearchResult<P::State> {
    let mut stats = SearchStats::default();
    // Reverse((priority, seq)): min-heap with FIFO tie-break
    let mut heap: BinaryHeap<Reverse<(i64, u64, usize)>> = BinaryHeap::new();
    let mut nodes: Vec<PathNode<P::State>> = Vec::new();
    let mut best_g: HashMap<String, i64> = HashMap::new();
    let mut seq = 0u64;
    let root = root_node(p);
    let prio = |n: &PathNode<P::State>, h: i64| match kind {
        BestFirstKind::Greedy => h,
        BestFirstKind::AStar => n.cost + h,
    };
    let h0 = p.heuristic(&root.state);
    best_g.insert(root.keys[0].clone(), 0);
    heap.push(Reverse((prio(&root, h0), seq, 0)));
    nodes.push(root);
    stats.generated += 1;
    stats.max_frontier = 1;
    while let Some(Reverse((_, _, idx))) = heap.pop() {
        let node = nodes[idx].clone();
        let key = node.keys.last().unwrap().clone();
        // a better route to this state has been queued since
        if best_g.get(&key).map(|g| node.cost > *g).unwrap_or(false) {
            continue;
        }
        if p.is_goal(&node.state) {
            stats.expanded += 1;
            return SearchResult {
                outcome: Outcome::Found {
                    path: node.path,
                    cost: node.cost,
                },
                stats,
            };
        }
        if let Some(max) = opts.max_expanded {
            if stats.expanded >= max {
                return SearchResult {
                    outcome: Outcome::BudgetExceeded,
                    stats,
                };
            }
        }
        stats.expanded += 1;
        for (s, c) in p.successors(&node.state) {
            let k = p.key(&s);
            let g = node.cost + c;
            if best_g.get(&k).map(|old| g >= *old).unwrap_or(false) {
                continue;
            }
            best_g.insert(k, g);
            let ch = child(p, &node, s, c);
            let h = p.heuristic(&ch.state);
            seq += 1;
            stats.generated += 1;
            heap.push(Reverse((prio(&ch, h), seq, nodes.len())));
            nodes.push(ch);
        }
        stats.max_frontier = stats.max_frontier.max(heap.len() as u64);
    }
    SearchResult {
        outcome: Outcome::Exhausted,
        stats,
    }
}

/// Beam search keeps the best `beam_width` frontier nodes per level by h
/// (ties in generation order); hill-climbing is width 1 and stops when no
/// successor improves h. Both are deliberately incomplete.
pub fn local_search<P: SearchProblem>(
    p: &P,
    kind: LocalKind,
    opts: SearchOptions,
) -> SearchResult<P::State> {
    let width = match kind {
        LocalKind::Beam => opts.beam_width.max(1),
        LocalKind::HillClimb => 1,
    };
    let improve_required = kind == LocalKind::HillClimb;
    let mut stats = SearchStats::default();
    let mut level = vec![root_node(p)];
    stats.generated += 1;
    stats.max_frontier = 1;
    loop {
        for n in &level {
            if p.is_goal(&n.state) {
                stats.expanded += 1;
                return SearchResult {
                    outcome: Outcome::Found {
                        path: n.path.clone(),
                        cost: n.cost,
                    },
                    stats,
                };
            }
        }
        let mut next: Vec<(i64, PathNode<P::State>)> = Vec::new();
        for node in &level {
            if let Some(max) = opts.max_expanded {
                if stats.expanded >= max {
                    return SearchResult {
                        outcome: Outcome::BudgetExceeded,
                        stats,
                    };
                }
            }
            stats.expanded += 1;
            let h_here = p.heuristic(&node.state);
            for (s, c) in p.successors(&node.state) {
                let ch = child(p, node, s, c);
                let h = p.heuristic(&ch.state);
                if improve_required && h >= h_here {
                    continue;
                }
                stats.generated += 1;
                next.push((h, ch));
            }
        }
        if next.is_empty() {
            return SearchResult {
                outcome: Outcome::Exhausted,
                stats,
            };
        }
        // stable sort keeps generation order among equal h
        next.sort_by_key(|(h, _)| *h);
        next.truncate(width);
        level = next.into_iter().map(|(_, n)| n).collect();
        stats.max_frontier = stats.max_frontier.max(level.len() as u64);
    }
}

// ---------------------------------------------------------------------
// SLD derivations as a search problem

/// One node of the SLD search space: the remaining goals under the
/// accumulated substitution.
#[derive(Clone, Debug)]
pub struct SldState {
    pub goals: Vec<Term>,
    pub depth: u32,
}

pub struct SldSearchProblem {
    program: Program,
    start_goals: Vec<Term>,
    max_depth: u32,
}

/// Wraps an SLD derivation space: states are goal lists, successors are
/// resolution steps in clause order with unit cost, goal test is the
/// empty goal. Programs containing `!` are rejected.
pub fn sld_problem(
    program: &Program,
    goal: &[Term],
    max_depth: u32,
) -> Result<SldSearchProblem, String> {
    if sld::program_contains_cut(program) {
        return Err("programs containing ! have no search-space reading".to_string());
    }
    Ok(SldSearchProblem {
        program: program.clone(),
        start_goals: goal.to_vec(),
        max_depth,
    })
}

impl SearchProblem for SldSearchProblem {
    type State = SldState;

    fn start(&self) -> SldState {
        SldState {
            goals: self.start_goals.clone(),
            depth: 0,
        }
    }

    fn is_goal(&self, s: &SldState) -> bool {
        s.goals.is_empty()
    }

    fn successors(&self, s: &SldState) -> Vec<(SldState, i64)> {
        let Some(selected) = s.goals.first() else {
            return Vec::new();
        };
        if s.depth >= self.max_depth {
            return Vec::new();
        }
        let Some((name, arity)) = selected.functor() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &idx in self.program.matching(name, arity) {
            // deterministic renaming keeps the successor function pure
            let clause = &self.program.clauses()[idx];
            let mut renaming = Subst::new();
            for v in clause.variables() {
                renaming.bind(
                    v.clone(),
                    Term::Var(format!("{v}_d{}c{}", s.depth, idx)),
                );
            }
            let head = renaming.apply(&clause.head[0]);
            let Some(theta) = unify(selected, &head, true) else {
                continue;
            };
            let mut goals: Vec<Term> =
                clause.body.iter().map(|b| theta.apply(&renaming.apply(b))).collect();
            goals.extend(s.goals.iter().skip(1).map(|g| theta.apply(g)));
            out.push((
                SldState {
                    goals,
                    depth: s.depth + 1,
                },
                1,
            ));
        }
        out
    }

    fn key(&self, s: &SldState) -> String {
        // canonicalize variable names so renamed variants coincide
        let mut canon = Subst::new();
        let mut supply = VarSupply::new();
        let goals: Vec<String> = s
            .goals
            .iter()
            .map(|g| {
                for v in g.variables() {
                    if canon.get(&v).is_none() {
                        canon.bind(v, supply.fresh_var());
                    }
                }
                canon.apply(g).to_string()
            })
            .collect();
        format!("d{}:{}", s.depth, goals.join(","))
    }
}

// ---------------------------------------------------------------------
// graph problems from files

/// A finite directed weighted graph with optional per-node heuristic
/// values, as read from a problem file.
#[derive(Clone, Debug, Default)]
pub struct GraphProblem {
    pub start: String,
    pub goals: HashSet<String>,
    pub edges: HashMap<String, Vec<(String, i64)>>,
    pub heuristics: HashMap<String, i64>,
}

impl SearchProblem for GraphProblem {
    type State = String;

    fn start(&self) -> String {
        self.start.clone()
    }

    fn is_goal(&self, s: &String) -> bool {
        self.goals.contains(s)
    }

    fn successors(&self, s: &String) -> Vec<(String, i64)> {
        self.edges.get(s).cloned().unwrap_or_default()
    }

    fn heuristic(&self, s: &String) -> i64 {
        self.heuristics.get(s).copied().unwrap_or(0)
    }

    fn key(&self, s: &String) -> String {
        s.clone()
    }
}

/// Problem file format, one item per line (`%` comments allowed):
///   start <node>
///   goal <node>
///   edge <from> <to> <cost>
///   h <node> <value>
pub fn parse_problem(text: &str) -> Result<GraphProblem, String> {
    let mut p = GraphProblem::default();
    let mut has_start = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Err(format!("line {}: {msg}: {raw}", lineno + 1));
        match fields[0] {
            "start" if fields.len() == 2 => {
                p.start = fields[1].to_string();
                has_start = true;
            }
            "goal" if fields.len() == 2 => {
                p.goals.insert(fields[1].to_string());
            }
            "edge" if fields.len() == 4 => {
                let cost: i64 = match fields[3].parse() {
                    Ok(c) if c >= 0 => c,
                    _ => return bad("edge cost must be a non-negative integer"),
                };
                p.edges
                    .entry(fields[1].to_string())
                    .or_default()
                    .push((fields[2].to_string(), cost));
            }
            "h" if fields.len() == 3 => {
                let v: i64 = match fields[2].parse() {
                    Ok(v) if v >= 0 => v,
                    _ => return bad("heuristic must be a non-negative integer"),
                };
                p.heuristics.insert(fields[1].to_string(), v);
            }
            _ => return bad("unrecognized problem line"),
        }
    }
    if !has_start {
        return Err("problem file has no start line".to_string());
    }
    if p.goals.is_empty() {
        return Err("problem file has no goal line".to_string());
    }
    Ok(p)
}
