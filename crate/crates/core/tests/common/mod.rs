//! Test support: corpus loading, independent oracles and a random spec generator.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use spacheck::explorer::{explore, ExploreLimits, StateGraph};
use spacheck::{bind_constants, parse_spec, Machine, State, Value};

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
}

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap()
}

pub fn machine(src: &str, consts: &[(&str, i64)]) -> Machine {
    let consts: Vec<_> = consts
        .iter()
        .map(|(n, v)| (n.to_string(), Value::Int(*v)))
        .collect();
    let spec = parse_spec(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    Machine::new(bind_constants(spec, &consts).unwrap()).unwrap_or_else(|e| panic!("{e:?}"))
}

pub fn math(n: i64) -> Machine {
    machine(&corpus("math.spa"), &[("max_num_q", n)])
}

pub fn math_buggy(n: i64) -> Machine {
    machine(&corpus("math_buggy.spa"), &[("max_num_q", n)])
}

pub fn clock() -> Machine {
    machine(&corpus("clock.spa"), &[])
}

/// math.spa with extra property lines appended.
pub fn math_with(n: i64, extra: &str) -> Machine {
    machine(
        &format!("{}\n{extra}\n", corpus("math.spa")),
        &[("max_num_q", n)],
    )
}

pub fn graph(m: &Machine) -> StateGraph {
    explore(m, ExploreLimits::default()).unwrap()
}

// ---------------------------------------------------------------------------
// Hand-written transition functions, independent of the DSL and its evaluator.

/// (num, count_right, count_wrong, result, input_enabled, check_enabled, new_question_enabled)
pub type MathTuple = (i64, i64, i64, &'static str, bool, bool, bool);

pub fn math_oracle_successors(s: MathTuple, n: i64, buggy: bool) -> Vec<MathTuple> {
    let (num, cr, cw, res, ie, ce, nq) = s;
    let mut out = Vec::new();
    if ie {
        out.push((num, cr, cw, res, false, true, nq));
    }
    if ce {
        out.push((num, cr + 1, cw, "Right", ie, false, true));
        out.push((num, cr, cw + 1, "Wrong", ie, false, true));
    }
    let limit = if buggy { n + 1 } else { n };
    if num < limit && nq {
        out.push((num + 1, cr, cw, "", true, ce, false));
    }
    if num == n {
        out.push(s);
    }
    out
}

/// Plain fixpoint: keep applying the successor function until the set stops growing.
pub fn fixpoint<T: Clone + Eq + std::hash::Hash>(
    init: Vec<T>,
    succ: impl Fn(&T) -> Vec<T>,
) -> HashSet<T> {
    let mut set: HashSet<T> = init.into_iter().collect();
    loop {
        let mut grown = set.clone();
        for s in &set {
            grown.extend(succ(s));
        }
        if grown.len() == set.len() {
            return set;
        }
        set = grown;
    }
}

pub fn math_oracle_states(n: i64, buggy: bool) -> HashSet<MathTuple> {
    fixpoint(vec![(1, 0, 0, "", true, false, false)], |s| {
        math_oracle_successors(*s, n, buggy)
    })
}

pub fn math_tuple_to_state(t: &MathTuple) -> State {
    State::new(vec![
        Value::Int(t.0),
        Value::Int(t.1),
        Value::Int(t.2),
        Value::str(t.3),
        Value::Bool(t.4),
        Value::Bool(t.5),
        Value::Bool(t.6),
    ])
}

pub fn clock_oracle_next(s: &(i64, &'static str)) -> (i64, &'static str) {
    let (hr, p) = *s;
    let hr2 = if hr == 12 { 1 } else { hr + 1 };
    let p2 = if hr == 11 {
        if p == "am" {
            "pm"
        } else {
            "am"
        }
    } else {
        p
    };
    (hr2, p2)
}

pub fn clock_oracle_states() -> HashSet<(i64, &'static str)> {
    let init: Vec<_> = (1..=12).flat_map(|h| [(h, "am"), (h, "pm")]).collect();
    fixpoint(init, |s| vec![clock_oracle_next(s)])
}

// ---------------------------------------------------------------------------
// Brute-force lasso oracle.
//
// Admitted behaviors end in a "loop": either a simple cycle of state-changing
// edges (two or more distinct states) or a quiescent state stuttered forever.
// Loops are enumerated exhaustively; verdicts follow from which loops can be
// reached through which states.

pub fn quiescent(graph: &StateGraph, v: usize) -> bool {
    graph.edges[v].iter().all(|e| e.target == v)
}

/// Every admitted loop, or `None` when there are more than `cap` simple cycles.
pub fn enumerate_loops(graph: &StateGraph, cap: usize) -> Option<Vec<Vec<usize>>> {
    let n = graph.len();
    let mut loops: Vec<Vec<usize>> = (0..n)
        .filter(|&v| quiescent(graph, v))
        .map(|v| vec![v])
        .collect();
    let mut cycles = 0usize;
    for start in 0..n {
        // simple paths from `start` through larger indices only, so each cycle is
        // found exactly once (rooted at its smallest member)
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut stack: Vec<usize> = vec![0];
        while let Some(pos) = stack.last_mut() {
            let v = *path.last().unwrap();
            let edges = &graph.edges[v];
            if *pos >= edges.len() {
                stack.pop();
                on_path[v] = false;
                path.pop();
                continue;
            }
            let w = edges[*pos].target;
            *pos += 1;
            if w == v {
                continue;
            }
            if w == start {
                if path.len() >= 2 && !loops.contains(&path) {
                    cycles += 1;
                    if cycles > cap {
                        return None;
                    }
                    loops.push(path.clone());
                }
                continue;
            }
            if w > start && !on_path[w] {
                on_path[w] = true;
                path.push(w);
                stack.push(0);
            }
        }
    }
    Some(loops)
}

/// States reachable from `from` moving only through `allowed` states.
pub fn reach_within(
    graph: &StateGraph,
    allowed: &[bool],
    from: impl IntoIterator<Item = usize>,
) -> Vec<bool> {
    let mut seen = vec![false; graph.len()];
    let mut queue = VecDeque::new();
    for s in from {
        if allowed[s] && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for e in &graph.edges[v] {
            if allowed[e.target] && !seen[e.target] {
                seen[e.target] = true;
                queue.push_back(e.target);
            }
        }
    }
    seen
}

pub fn oracle_eventually(graph: &StateGraph, loops: &[Vec<usize>], holds: &[bool]) -> bool {
    let not: Vec<bool> = holds.iter().map(|h| !h).collect();
    let reach = reach_within(graph, &not, graph.initial.iter().copied());
    !loops
        .iter()
        .any(|l| l.iter().all(|&v| not[v]) && reach[l[0]])
}

pub fn oracle_always_eventually(loops: &[Vec<usize>], holds: &[bool]) -> bool {
    !loops.iter().any(|l| l.iter().all(|&v| !holds[v]))
}

pub fn oracle_leadsto(graph: &StateGraph, loops: &[Vec<usize>], p: &[bool], q: &[bool]) -> bool {
    let not_q: Vec<bool> = q.iter().map(|h| !h).collect();
    let starts = (0..graph.len()).filter(|&v| p[v] && !q[v]);
    let reach = reach_within(graph, &not_q, starts);
    !loops
        .iter()
        .any(|l| l.iter().all(|&v| not_q[v]) && reach[l[0]])
}

// ---------------------------------------------------------------------------
// Random small specs.

struct VarSpec {
    name: String,
    max: Option<i64>, // None = bool
}

fn int_value_expr<R: Rng>(rng: &mut R, target: &VarSpec, vars: &[VarSpec]) -> String {
    let k = target.max.unwrap();
    let v = &target.name;
    match rng.gen_range(0..4) {
        0 => rng.gen_range(0..=k).to_string(),
        1 => format!("if {v} < {k} then {v} + 1 else 0"),
        2 => format!("if {v} > 0 then {v} - 1 else {k}"),
        _ => {
            let others: Vec<&VarSpec> = vars.iter().filter(|w| w.max.is_some()).collect();
            let w = others.choose(rng).unwrap();
            format!("if {} > {k} then {k} else {}", w.name, w.name)
        }
    }
}

fn atom<R: Rng>(rng: &mut R, vars: &[VarSpec]) -> String {
    let v = vars.choose(rng).unwrap();
    match v.max {
        Some(k) => {
            let op = ["=", "/=", "<", ">="].choose(rng).unwrap();
            format!("{} {op} {}", v.name, rng.gen_range(0..=k))
        }
        None => {
            if rng.gen_bool(0.5) {
                v.name.clone()
            } else {
                format!("not {}", v.name)
            }
        }
    }
}

fn predicate<R: Rng>(rng: &mut R, vars: &[VarSpec]) -> String {
    match rng.gen_range(0..4) {
        0 => format!("{} and {}", atom(rng, vars), atom(rng, vars)),
        1 => format!("{} or {}", atom(rng, vars), atom(rng, vars)),
        _ => atom(rng, vars),
    }
}

fn assignment<R: Rng>(rng: &mut R, target: &VarSpec, vars: &[VarSpec]) -> String {
    match target.max {
        Some(k) if rng.gen_bool(0.2) => {
            let a = rng.gen_range(0..=k);
            let b = rng.gen_range(0..=k);
            format!("any t in {{{a}, {b}}} {{ {}' = t }}", target.name)
        }
        Some(_) => format!("{}' = {}", target.name, int_value_expr(rng, target, vars)),
        None => match rng.gen_range(0..3) {
            0 => format!("{}' = not {}", target.name, target.name),
            1 => format!("{}' = {}", target.name, rng.gen_bool(0.5)),
            _ => format!("{}' = {}", target.name, predicate(rng, vars)),
        },
    }
}

/// A random spec with at most 3 variables over domains of size at most 3 and at
/// most 4 actions, plus one property of each liveness shape.
pub fn random_spec<R: Rng>(rng: &mut R, id: usize) -> String {
    let n_vars = rng.gen_range(1..=3);
    let mut vars: Vec<VarSpec> = (0..n_vars)
        .map(|i| VarSpec {
            name: format!("v{i}"),
            max: if rng.gen_bool(0.6) {
                Some(rng.gen_range(1..=2))
            } else {
                None
            },
        })
        .collect();
    if vars.iter().all(|v| v.max.is_none()) {
        vars[0].max = Some(2);
    }
    let mut src = format!("spec rnd{id}\n");
    for v in &vars {
        match v.max {
            Some(k) => {
                let init = if rng.gen_bool(0.3) {
                    format!("init in {{0, {}}}", rng.gen_range(1..=k))
                } else {
                    format!("init {}", rng.gen_range(0..=k))
                };
                src.push_str(&format!("var {} : int domain 0..{k} {init}\n", v.name));
            }
            None => {
                let init = if rng.gen_bool(0.3) {
                    "init in {true, false}".to_string()
                } else {
                    format!("init {}", rng.gen_bool(0.5))
                };
                src.push_str(&format!("var {} : bool {init}\n", v.name));
            }
        }
    }
    let n_actions = rng.gen_range(1..=4);
    for a in 0..n_actions {
        src.push_str(&format!("action A{a} {{\n"));
        if rng.gen_bool(0.7) {
            src.push_str(&format!("  when {}\n", predicate(rng, &vars)));
        }
        let mut targets: Vec<usize> = (0..vars.len()).collect();
        targets.shuffle(rng);
        let n_assign = rng.gen_range(0..=targets.len().min(2));
        for &t in &targets[..n_assign] {
            src.push_str(&format!("  {}\n", assignment(rng, &vars[t], &vars)));
        }
        src.push_str("}\n");
    }
    src.push_str(&format!(
        "property E: eventually ({})\n",
        predicate(rng, &vars)
    ));
    src.push_str(&format!(
        "property L: ({}) leadsto ({})\n",
        predicate(rng, &vars),
        predicate(rng, &vars)
    ));
    src.push_str(&format!(
        "property R: always eventually ({})\n",
        predicate(rng, &vars)
    ));
    src
}

/// Oracle verdict (true = pass) for a declared liveness property. Predicates are
/// evaluated with the library; all graph reasoning is done by the brute-force
/// loop enumeration above.
pub fn oracle_property(
    machine: &Machine,
    graph: &StateGraph,
    loops: &[Vec<usize>],
    prop: &spacheck::model::TemporalProperty,
) -> bool {
    use spacheck::model::Shape;
    let instances: Vec<Vec<Value>> = match &prop.binder {
        None => vec![vec![]],
        Some(b) => machine
            .eval_constant_set(&b.set, "oracle")
            .unwrap()
            .into_iter()
            .map(|v| vec![v])
            .collect(),
    };
    let binder_kinds: Vec<(&str, spacheck::Kind)> = match &prop.binder {
        None => vec![],
        Some(b) => {
            let vals = machine.eval_constant_set(&b.set, "oracle").unwrap();
            match vals.first() {
                Some(v) => vec![(b.var.as_str(), v.kind())],
                None => return true,
            }
        }
    };
    let mask = |e: &spacheck::model::Expr, inst: &[Value]| -> Vec<bool> {
        let c = machine
            .compile_predicate(e, &binder_kinds, "oracle")
            .unwrap();
        graph
            .states
            .iter()
            .map(|s| machine.eval_predicate(&c, s, inst, "oracle").unwrap())
            .collect()
    };
    instances.iter().all(|inst| match &prop.shape {
        Shape::Invariant(e) => mask(e, inst).iter().all(|&h| h),
        Shape::Eventually(e) => oracle_eventually(graph, loops, &mask(e, inst)),
        Shape::AlwaysEventually(e) => oracle_always_eventually(loops, &mask(e, inst)),
        Shape::LeadsTo(p, q) => oracle_leadsto(graph, loops, &mask(p, inst), &mask(q, inst)),
    })
}

/// Structural lasso checks against the explored graph: every step is an edge
/// labelled with its action and the loop closes either through a real edge or by
/// stuttering at a quiescent final state.
pub fn assert_lasso(graph: &StateGraph, trace: &spacheck::explorer::Trace) {
    let idx: Vec<usize> = trace
        .states
        .iter()
        .map(|s| graph.index_of(s).expect("state not in graph"))
        .collect();
    assert!(graph.is_initial(idx[0]));
    assert_eq!(trace.actions.len() + 1, trace.states.len());
    for (i, a) in trace.actions.iter().enumerate() {
        assert!(
            graph.edges[idx[i]]
                .iter()
                .any(|e| e.target == idx[i + 1] && graph.action_name(e.action) == a),
            "step {i} is not an edge"
        );
    }
    let k = trace.loop_start.expect("lasso without loop");
    let last = *idx.last().unwrap();
    if k == idx.len() - 1 {
        // stutter at a quiescent state, named after its self-loop if it has one
        assert!(
            quiescent(graph, last),
            "stutter loop at a non-quiescent state"
        );
        match &trace.loop_action {
            None => assert!(graph.edges[last].is_empty()),
            Some(a) => assert!(graph.edges[last]
                .iter()
                .any(|e| graph.action_name(e.action) == a)),
        }
    } else {
        let a = trace
            .loop_action
            .as_ref()
            .expect("cycle without closing action");
        assert!(graph.edges[last]
            .iter()
            .any(|e| e.target == idx[k] && graph.action_name(e.action) == a));
    }
}

pub fn property<'a>(m: &'a Machine, name: &str) -> &'a spacheck::model::TemporalProperty {
    m.spec().properties.iter().find(|p| p.name == name).unwrap()
}

pub fn verdict(m: &Machine, g: &StateGraph, name: &str) -> spacheck::explorer::Verdict {
    spacheck::liveness::check_property(m, g, property(m, name))
}

pub const LOOP_CAP: usize = 20_000;

/// Independent trace check against the explored graph, with the same contract as
/// `replay_trace`: an initial first state, labelled edges between neighbours and
/// a loop closed by a labelled edge or by plain stuttering at the last state.
pub fn graph_admits(graph: &StateGraph, trace: &spacheck::explorer::Trace) -> bool {
    let Some(idx) = trace
        .states
        .iter()
        .map(|s| graph.index_of(s))
        .collect::<Option<Vec<usize>>>()
    else {
        return false;
    };
    let edge = |a: usize, b: usize, name: &str| {
        graph.edges[a]
            .iter()
            .any(|e| e.target == b && graph.action_name(e.action) == name)
    };
    if idx.is_empty() || !graph.is_initial(idx[0]) || trace.actions.len() + 1 != idx.len() {
        return false;
    }
    if !(1..idx.len()).all(|i| edge(idx[i - 1], idx[i], &trace.actions[i - 1])) {
        return false;
    }
    let last = idx.len() - 1;
    match (trace.loop_start, &trace.loop_action) {
        (None, None) => true,
        (None, Some(_)) => false,
        (Some(k), None) => k == last,
        (Some(k), Some(a)) => k <= last && edge(idx[last], idx[k], a),
    }
}
