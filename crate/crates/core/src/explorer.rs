//! Breadth-first construction of the reachable state graph, safety checks and
//! counterexample traces.
//!
//! Deadlock here means "no successor at all". A state whose only successors are
//! stuttering self-loops (the `Terminating` pattern) is *not* deadlocked; it is
//! quiescent, which matters to the liveness checks instead.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::State;
use crate::semantics::{EvalError, Machine};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_states: usize,
    pub max_depth: Option<usize>,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_states: 1_000_000,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub action: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateGraph {
    /// Index = BFS discovery order.
    pub states: Vec<State>,
    pub key_index: HashMap<Vec<u8>, usize>,
    pub initial: Vec<usize>,
    pub edges: Vec<Vec<Edge>>,
    /// `(predecessor, action)` that first discovered each non-initial state.
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<usize>,
    pub action_names: Vec<String>,
}

impl StateGraph {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn index_of(&self, state: &State) -> Option<usize> {
        self.key_index.get(&state.canonical_key()).copied()
    }

    pub fn action_name(&self, action: usize) -> &str {
        &self.action_names[action]
    }

    pub fn is_initial(&self, index: usize) -> bool {
        self.parent[index].is_none()
    }
}

/// A finite execution, optionally closed into a lasso.
///
/// With `loop_start = Some(i)` the behavior continues from the last state back to
/// `states[i]` and repeats forever. `loop_action` names the action taking that
/// closing step; `None` means plain stuttering, which requires `i` to be the last
/// index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<State>,
    pub actions: Vec<String>,
    pub loop_start: Option<usize>,
    pub loop_action: Option<String>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Deadlock,
    Invariant,
    Eventually,
    LeadsTo,
    AlwaysEventually,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Deadlock => "deadlock",
            CheckKind::Invariant => "invariant",
            CheckKind::Eventually => "eventually",
            CheckKind::LeadsTo => "leadsto",
            CheckKind::AlwaysEventually => "always_eventually",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub kind: CheckKind,
    pub status: Status,
    /// Binder value of the failing instance of a `forall` property.
    pub binder: Option<Value>,
    pub trace: Option<Trace>,
    pub detail: String,
}

impl Verdict {
    pub fn pass(name: &str, kind: CheckKind, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.to_string(),
            kind,
            status: Status::Pass,
            binder: None,
            trace: None,
            detail: detail.into(),
        }
    }

    pub fn fail(name: &str, kind: CheckKind, trace: Trace, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.to_string(),
            kind,
            status: Status::Fail,
            binder: None,
            trace: Some(trace),
            detail: detail.into(),
        }
    }

    pub fn error(name: &str, kind: CheckKind, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.to_string(),
            kind,
            status: Status::Error,
            binder: None,
            trace: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploreError {
    #[error("{error}")]
    Eval {
        error: Box<EvalError>,
        /// Discovery path to the state whose evaluation failed.
        trace: Option<Trace>,
    },
    #[error("state limit exceeded: more than {0} reachable states")]
    StateLimit(usize),
    #[error("depth limit exceeded: states deeper than {0} steps are reachable")]
    DepthLimit(usize),
    #[error("the spec has no initial states")]
    NoInitialStates,
}

/// Builds the reachable state graph breadth-first. States are numbered in
/// discovery order and successors are expanded in the order produced by
/// [`Machine::successors`], so the result is fully deterministic.
pub fn explore(machine: &Machine, limits: ExploreLimits) -> Result<StateGraph, ExploreError> {
    let mut graph = StateGraph {
        states: Vec::new(),
        key_index: HashMap::new(),
        initial: Vec::new(),
        edges: Vec::new(),
        parent: Vec::new(),
        depth: Vec::new(),
        action_names: machine.action_names().map(str::to_string).collect(),
    };
    let initial = machine
        .initial_states()
        .map_err(|error| ExploreError::Eval {
            error: Box::new(error),
            trace: None,
        })?;
    if initial.is_empty() {
        return Err(ExploreError::NoInitialStates);
    }
    for state in initial {
        let key = state.canonical_key();
        if graph.key_index.contains_key(&key) {
            continue;
        }
        if graph.states.len() >= limits.max_states {
            return Err(ExploreError::StateLimit(limits.max_states));
        }
        let idx = graph.states.len();
        graph.key_index.insert(key, idx);
        graph.states.push(state);
        graph.initial.push(idx);
        graph.parent.push(None);
        graph.depth.push(0);
    }

    // The state list doubles as the FIFO frontier.
    let mut next = 0;
    while next < graph.states.len() {
        let succs = match machine.successors(&graph.states[next]) {
            Ok(s) => s,
            Err(error) => {
                let trace = reconstruct_trace(&graph, next);
                return Err(ExploreError::Eval {
                    error: Box::new(error),
                    trace: Some(trace),
                });
            }
        };
        let mut out = Vec::with_capacity(succs.len());
        for (action, state) in succs {
            let key = state.canonical_key();
            let target = match graph.key_index.get(&key) {
                Some(&t) => t,
                None => {
                    if graph.states.len() >= limits.max_states {
                        return Err(ExploreError::StateLimit(limits.max_states));
                    }
                    let depth = graph.depth[next] + 1;
                    if limits.max_depth.is_some_and(|max| depth > max) {
                        return Err(ExploreError::DepthLimit(limits.max_depth.unwrap()));
                    }
                    let t = graph.states.len();
                    graph.key_index.insert(key, t);
                    graph.states.push(state);
                    graph.parent.push(Some((next, action)));
                    graph.depth.push(depth);
                    t
                }
            };
            let edge = Edge { action, target };
            if !out.contains(&edge) {
                out.push(edge);
            }
        }
        graph.edges.push(out);
        next += 1;
    }
    Ok(graph)
}

/// Shortest discovery path from an initial state to `target`, via parent links.
pub fn reconstruct_trace(graph: &StateGraph, target: usize) -> Trace {
    let mut indices = vec![target];
    let mut actions = Vec::new();
    let mut cur = target;
    while let Some((prev, action)) = graph.parent[cur] {
        actions.push(graph.action_names[action].clone());
        indices.push(prev);
        cur = prev;
    }
    indices.reverse();
    actions.reverse();
    Trace {
        states: indices
            .into_iter()
            .map(|i| graph.states[i].clone())
            .collect(),
        actions,
        loop_start: None,
        loop_action: None,
    }
}

/// `holds[i]` is the predicate's value at state `i`. Reports the first violating
/// state in BFS order with its shortest discovery path.
pub fn check_invariant(graph: &StateGraph, holds: &[bool], name: &str) -> Verdict {
    match holds.iter().position(|h| !h) {
        None => Verdict::pass(
            name,
            CheckKind::Invariant,
            format!("holds in all {} states", graph.len()),
        ),
        Some(idx) => {
            let trace = reconstruct_trace(graph, idx);
            let detail = format!("violated after {} step(s)", trace.len() - 1);
            Verdict::fail(name, CheckKind::Invariant, trace, detail)
        }
    }
}

pub fn check_deadlock(graph: &StateGraph) -> Verdict {
    match graph.edges.iter().position(Vec::is_empty) {
        None => Verdict::pass(
            "deadlock",
            CheckKind::Deadlock,
            "every state has a successor",
        ),
        Some(idx) => {
            let trace = reconstruct_trace(graph, idx);
            let detail = format!(
                "deadlock reached after {} step(s): no action is enabled",
                trace.len() - 1
            );
            Verdict::fail("deadlock", CheckKind::Deadlock, trace, detail)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replay {
    Valid,
    /// Index of the first state that cannot be justified: 0 for a non-initial first
    /// state, `i` for a bad step into `states[i]`, `len` for a bad loop-closing step.
    InvalidAt(usize),
}

/// Re-executes every step of `trace` against the spec, independently of the graph
/// it was extracted from.
pub fn replay_trace(machine: &Machine, trace: &Trace) -> Replay {
    let n_vars = machine.spec().variables.len();
    let Some(first) = trace.states.first() else {
        return Replay::InvalidAt(0);
    };
    if let Some(bad) = trace.states.iter().position(|s| s.len() != n_vars) {
        return Replay::InvalidAt(bad);
    }
    match machine.initial_states() {
        Ok(init) if init.contains(first) => {}
        _ => return Replay::InvalidAt(0),
    }
    if trace.actions.len() + 1 != trace.states.len() {
        return Replay::InvalidAt(trace.actions.len().min(trace.states.len()));
    }
    let step_ok = |from: &State, action: &str, to: &State| -> bool {
        let names: Vec<&str> = machine.action_names().collect();
        let Some(a) = names.iter().position(|n| *n == action) else {
            return false;
        };
        machine
            .action_successors(from, a)
            .is_ok_and(|succs| succs.contains(to))
    };
    for i in 1..trace.states.len() {
        if !step_ok(
            &trace.states[i - 1],
            &trace.actions[i - 1],
            &trace.states[i],
        ) {
            return Replay::InvalidAt(i);
        }
    }
    if let Some(start) = trace.loop_start {
        let last = trace.states.len() - 1;
        let ok = start <= last
            && match &trace.loop_action {
                Some(a) => step_ok(&trace.states[last], a, &trace.states[start]),
                None => start == last,
            };
        if !ok {
            return Replay::InvalidAt(trace.states.len());
        }
    } else if trace.loop_action.is_some() {
        return Replay::InvalidAt(trace.states.len());
    }
    Replay::Valid
}
