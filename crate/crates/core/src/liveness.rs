//! Liveness checking under weak fairness of the state-changing next-step relation.
//!
//! The admitted infinite behaviors are those that either take state-changing
//! steps infinitely often, or reach a quiescent state (no edge to a different
//! state) and stutter there forever. Self-loop edges are stuttering steps: they
//! never discharge fairness, so a fair cycle needs at least two distinct states.
//! A counterexample is therefore a path into either a nontrivial strongly
//! connected component of state-changing edges or a quiescent state, all within
//! the states that violate the target predicate.

use std::collections::VecDeque;

use crate::explorer::{check_invariant, CheckKind, StateGraph, Status, Trace, Verdict};
use crate::model::{Shape, TemporalProperty};
use crate::semantics::{Compiled, EvalError, Machine};
use crate::value::Value;

const NONE: usize = usize::MAX;

/// States without an edge to a different state, in index order.
pub fn quiescent_states(graph: &StateGraph) -> Vec<usize> {
    (0..graph.len())
        .filter(|&v| is_quiescent(graph, v))
        .collect()
}

fn is_quiescent(graph: &StateGraph, v: usize) -> bool {
    graph.edges[v].iter().all(|e| e.target == v)
}

/// Strongly connected components of the subgraph induced by `allowed` states and
/// their state-changing edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccInfo {
    /// Component id per state; `None` for states outside the restriction or not
    /// reached from the roots.
    pub component: Vec<Option<usize>>,
    pub members: Vec<Vec<usize>>,
    pub nontrivial: Vec<bool>,
}

impl SccInfo {
    pub fn in_nontrivial(&self, v: usize) -> bool {
        self.component[v].is_some_and(|c| self.nontrivial[c])
    }
}

/// Iterative Tarjan over the restricted graph, visiting only what is reachable
/// from `roots`.
pub fn restricted_sccs(
    graph: &StateGraph,
    allowed: &[bool],
    roots: impl IntoIterator<Item = usize>,
) -> SccInfo {
    let n = graph.len();
    let mut index = vec![NONE; n];
    let mut lowlink = vec![NONE; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component = vec![None; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0;
    let mut calls: Vec<(usize, usize)> = Vec::new();

    for root in roots {
        if !allowed[root] || index[root] != NONE {
            continue;
        }
        index[root] = counter;
        lowlink[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        calls.push((root, 0));

        while let Some(&(v, pos)) = calls.last() {
            let edges = &graph.edges[v];
            if pos < edges.len() {
                calls.last_mut().unwrap().1 += 1;
                let w = edges[pos].target;
                if w == v || !allowed[w] {
                    continue;
                }
                if index[w] == NONE {
                    index[w] = counter;
                    lowlink[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                calls.pop();
                if let Some(&(parent, _)) = calls.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let id = members.len();
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component[w] = Some(id);
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    members.push(comp);
                }
            }
        }
    }
    let nontrivial = members.iter().map(|m| m.len() >= 2).collect();
    SccInfo {
        component,
        members,
        nontrivial,
    }
}

/// Path as state indices plus the action taken between consecutive entries.
struct Path {
    states: Vec<usize>,
    actions: Vec<usize>,
}

fn edge_action(graph: &StateGraph, from: usize, to: usize) -> usize {
    graph.edges[from]
        .iter()
        .find(|e| e.target == to)
        .map(|e| e.action)
        .expect("edge exists")
}

/// Breadth-first search over state-changing edges inside `allowed`, seeded with
/// `starts` in order. Returns the visit order and BFS parents.
fn restricted_bfs(
    graph: &StateGraph,
    allowed: &[bool],
    starts: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let mut parent = vec![NONE; graph.len()];
    let mut seen = vec![false; graph.len()];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for &s in starts {
        if allowed[s] && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for e in &graph.edges[v] {
            let w = e.target;
            if w != v && allowed[w] && !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    (order, parent)
}

fn bfs_path(graph: &StateGraph, parent: &[usize], target: usize) -> Path {
    let mut states = vec![target];
    let mut cur = target;
    while parent[cur] != NONE {
        cur = parent[cur];
        states.push(cur);
    }
    states.reverse();
    let actions = states
        .windows(2)
        .map(|w| edge_action(graph, w[0], w[1]))
        .collect();
    Path { states, actions }
}

/// Closes a path ending at `witness` into a lasso: a stutter at a quiescent
/// witness, or the shortest cycle back to the witness inside its component.
fn close_lasso(graph: &StateGraph, sccs: &SccInfo, mut path: Path) -> Trace {
    let witness = *path.states.last().unwrap();
    let loop_start = path.states.len() - 1;
    let loop_action;
    if is_quiescent(graph, witness) {
        loop_action = graph.edges[witness].first().map(|e| e.action);
    } else {
        let comp = sccs.component[witness].expect("witness lies in a component");
        let mut parent = vec![NONE; graph.len()];
        let mut queue = VecDeque::from([witness]);
        let mut closing = NONE;
        'search: while let Some(v) = queue.pop_front() {
            for e in &graph.edges[v] {
                let w = e.target;
                if w == v || sccs.component[w] != Some(comp) {
                    continue;
                }
                if w == witness {
                    closing = v;
                    break 'search;
                }
                if parent[w] == NONE {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        assert_ne!(
            closing, NONE,
            "nontrivial component has a cycle through every member"
        );
        let mut cycle = vec![closing];
        let mut cur = closing;
        while cur != witness {
            cur = parent[cur];
            cycle.push(cur);
        }
        cycle.reverse();
        // cycle = [witness, c1, ..., ck]
        for pair in cycle.windows(2) {
            path.actions.push(edge_action(graph, pair[0], pair[1]));
            path.states.push(pair[1]);
        }
        loop_action = Some(edge_action(graph, closing, witness));
    }
    Trace {
        states: path
            .states
            .iter()
            .map(|&i| graph.states[i].clone())
            .collect(),
        actions: path
            .actions
            .iter()
            .map(|&a| graph.action_name(a).to_string())
            .collect(),
        loop_start: Some(loop_start),
        loop_action: loop_action.map(|a| graph.action_name(a).to_string()),
    }
}

fn is_trap(graph: &StateGraph, sccs: &SccInfo, v: usize) -> bool {
    is_quiescent(graph, v) || sccs.in_nontrivial(v)
}

fn loop_detail(trace: &Trace) -> String {
    let start = trace.loop_start.unwrap_or(0);
    if start + 1 == trace.len() {
        format!("behavior stutters forever at state {}", start + 1)
    } else {
        format!(
            "behavior cycles forever through states {}..{}",
            start + 1,
            trace.len()
        )
    }
}

/// `holds[i]` is the predicate at state `i`. Fails iff some admitted behavior
/// never reaches a predicate state.
pub fn check_eventually(graph: &StateGraph, holds: &[bool], name: &str) -> Verdict {
    let allowed: Vec<bool> = holds.iter().map(|h| !h).collect();
    let starts: Vec<usize> = graph
        .initial
        .iter()
        .copied()
        .filter(|&s| allowed[s])
        .collect();
    let (order, parent) = restricted_bfs(graph, &allowed, &starts);
    let sccs = restricted_sccs(graph, &allowed, starts.iter().copied());
    let witness = order
        .iter()
        .copied()
        .filter(|&v| is_trap(graph, &sccs, v))
        .min();
    match witness {
        None => Verdict::pass(
            name,
            CheckKind::Eventually,
            "every fair behavior reaches the predicate",
        ),
        Some(w) => {
            let trace = close_lasso(graph, &sccs, bfs_path(graph, &parent, w));
            let detail = format!("predicate never holds; {}", loop_detail(&trace));
            Verdict::fail(name, CheckKind::Eventually, trace, detail)
        }
    }
}

/// Fails iff some admitted behavior eventually stops visiting predicate states.
pub fn check_always_eventually(graph: &StateGraph, holds: &[bool], name: &str) -> Verdict {
    let allowed: Vec<bool> = holds.iter().map(|h| !h).collect();
    let sccs = restricted_sccs(graph, &allowed, 0..graph.len());
    let witness = (0..graph.len()).find(|&v| allowed[v] && is_trap(graph, &sccs, v));
    match witness {
        None => Verdict::pass(
            name,
            CheckKind::AlwaysEventually,
            "every fair behavior visits the predicate infinitely often",
        ),
        Some(w) => {
            let prefix = discovery_path(graph, w);
            let trace = close_lasso(graph, &sccs, prefix);
            let detail = format!("predicate stops holding; {}", loop_detail(&trace));
            Verdict::fail(name, CheckKind::AlwaysEventually, trace, detail)
        }
    }
}

/// Fails iff from some reachable `p` state a fair continuation avoids `q` forever.
pub fn check_leadsto(graph: &StateGraph, p: &[bool], q: &[bool], name: &str) -> Verdict {
    let n = graph.len();
    let allowed: Vec<bool> = q.iter().map(|h| !h).collect();
    let sccs = restricted_sccs(graph, &allowed, 0..n);

    // Backward closure of the trap states inside the restriction.
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if !allowed[v] {
            continue;
        }
        for e in &graph.edges[v] {
            if e.target != v && allowed[e.target] {
                reverse[e.target].push(v);
            }
        }
    }
    let mut doomed = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&v| allowed[v] && is_trap(graph, &sccs, v))
        .collect();
    for &v in &queue {
        doomed[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &u in &reverse[v] {
            if !doomed[u] {
                doomed[u] = true;
                queue.push_back(u);
            }
        }
    }

    let Some(start) = (0..n).find(|&v| p[v] && doomed[v]) else {
        return Verdict::pass(
            name,
            CheckKind::LeadsTo,
            "every reachable p-state is followed by a q-state",
        );
    };
    let (order, parent) = restricted_bfs(graph, &allowed, &[start]);
    let trap = order
        .iter()
        .copied()
        .find(|&v| is_trap(graph, &sccs, v))
        .expect("doomed state reaches a trap");
    let tail = bfs_path(graph, &parent, trap);
    let mut path = discovery_path(graph, start);
    path.states.extend_from_slice(&tail.states[1..]);
    path.actions.extend(tail.actions);
    let obligation = path.states.iter().position(|&v| v == start).unwrap();
    let trace = close_lasso(graph, &sccs, path);
    let detail = format!(
        "p holds at state {} but q never follows; {}",
        obligation + 1,
        loop_detail(&trace)
    );
    Verdict::fail(name, CheckKind::LeadsTo, trace, detail)
}

fn discovery_path(graph: &StateGraph, target: usize) -> Path {
    let mut states = vec![target];
    let mut actions = Vec::new();
    let mut cur = target;
    while let Some((prev, action)) = graph.parent[cur] {
        states.push(prev);
        actions.push(action);
        cur = prev;
    }
    states.reverse();
    actions.reverse();
    Path { states, actions }
}

/// Evaluates a compiled predicate at every state of the graph.
pub fn predicate_mask(
    machine: &Machine,
    graph: &StateGraph,
    pred: &Compiled,
    binders: &[Value],
    context: &str,
) -> Result<Vec<bool>, EvalError> {
    graph
        .states
        .iter()
        .map(|s| machine.eval_predicate(pred, s, binders, context))
        .collect()
}

fn kind_of(shape: &Shape) -> CheckKind {
    match shape {
        Shape::Invariant(_) => CheckKind::Invariant,
        Shape::Eventually(_) => CheckKind::Eventually,
        Shape::LeadsTo(..) => CheckKind::LeadsTo,
        Shape::AlwaysEventually(_) => CheckKind::AlwaysEventually,
    }
}

/// Checks one declared property, expanding a `forall` binder into one kernel check
/// per element. The first failing instance (in set order) decides the verdict.
pub fn check_property(machine: &Machine, graph: &StateGraph, prop: &TemporalProperty) -> Verdict {
    let kind = kind_of(&prop.shape);
    let context = format!("property {}", prop.name);
    let (binder_name, values) = match &prop.binder {
        None => (None, vec![None]),
        Some(b) => match machine.eval_constant_set(&b.set, &context) {
            Ok(vals) if vals.is_empty() => {
                return Verdict::pass(
                    &prop.name,
                    kind,
                    format!(
                        "warning: binder set of `{}` is empty; holds vacuously",
                        b.var
                    ),
                )
            }
            Ok(vals) => (Some(b.var.as_str()), vals.into_iter().map(Some).collect()),
            Err(e) => return Verdict::error(&prop.name, kind, e.to_string()),
        },
    };
    let binder_kinds: Vec<_> = match (binder_name, values.first()) {
        (Some(name), Some(Some(v))) => vec![(name, v.kind())],
        _ => Vec::new(),
    };
    let compile = |e| machine.compile_predicate(e, &binder_kinds, &context);
    let preds: Result<Vec<Compiled>, _> = match &prop.shape {
        Shape::Invariant(e) | Shape::Eventually(e) | Shape::AlwaysEventually(e) => {
            compile(e).map(|c| vec![c])
        }
        Shape::LeadsTo(l, r) => compile(l).and_then(|cl| compile(r).map(|cr| vec![cl, cr])),
    };
    let preds = match preds {
        Ok(p) => p,
        Err(errors) => {
            let msg = errors
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            return Verdict::error(&prop.name, kind, msg);
        }
    };

    let instances = values.len();
    let mut last = None;
    for value in values {
        let binders: Vec<Value> = value.iter().cloned().collect();
        let masks: Result<Vec<Vec<bool>>, EvalError> = preds
            .iter()
            .map(|p| predicate_mask(machine, graph, p, &binders, &context))
            .collect();
        let masks = match masks {
            Ok(m) => m,
            Err(e) => {
                let mut v = Verdict::error(&prop.name, kind, e.to_string());
                v.binder = value;
                return v;
            }
        };
        let mut verdict = match &prop.shape {
            Shape::Invariant(_) => check_invariant(graph, &masks[0], &prop.name),
            Shape::Eventually(_) => check_eventually(graph, &masks[0], &prop.name),
            Shape::AlwaysEventually(_) => check_always_eventually(graph, &masks[0], &prop.name),
            Shape::LeadsTo(..) => check_leadsto(graph, &masks[0], &masks[1], &prop.name),
        };
        if verdict.status != Status::Pass {
            if let (Some(name), Some(v)) = (binder_name, &value) {
                verdict.detail = format!("fails for {name} = {v}: {}", verdict.detail);
            }
            verdict.binder = value;
            return verdict;
        }
        last = Some(verdict);
    }
    if binder_name.is_some() {
        Verdict::pass(
            &prop.name,
            kind,
            format!("holds for all {instances} instances"),
        )
    } else {
        last.expect("at least one instance")
    }
}
