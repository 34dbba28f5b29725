//! Check orchestration and report rendering (text, JSON, DOT).

use std::fmt::Write;

use serde_json::{json, Map, Value as Json};

use crate::explorer::{check_deadlock, StateGraph, Status, Trace, Verdict};
use crate::liveness::check_property;
use crate::model::{state_to_record, SpecModel};
use crate::semantics::Machine;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub spec: String,
    pub constants: Vec<(String, Value)>,
    pub variables: Vec<String>,
    pub states: usize,
    pub transitions: usize,
    pub elapsed_ms: f64,
    pub results: Vec<Verdict>,
}

impl Report {
    pub fn new(
        machine: &Machine,
        graph: &StateGraph,
        results: Vec<Verdict>,
        elapsed_ms: f64,
    ) -> Self {
        let spec = machine.spec();
        Report {
            spec: spec.name.clone(),
            constants: machine
                .bound()
                .constants()
                .map(|(n, v)| (n.to_string(), v.clone()))
                .collect(),
            variables: spec.variables.iter().map(|v| v.name.clone()).collect(),
            states: graph.len(),
            transitions: graph.transition_count(),
            elapsed_ms,
            results,
        }
    }

    /// 0 when everything passes, 1 when some check fails, 2 when some check errored.
    pub fn exit_code(&self) -> i32 {
        if self.results.iter().any(|v| v.status == Status::Error) {
            2
        } else if self.results.iter().any(|v| v.status == Status::Fail) {
            1
        } else {
            0
        }
    }
}

/// Deadlock first (when enabled), then every declared property in declaration order.
pub fn run_checks(machine: &Machine, graph: &StateGraph, deadlock: bool) -> Vec<Verdict> {
    let mut results = Vec::new();
    if deadlock {
        results.push(check_deadlock(graph));
    }
    for prop in &machine.spec().properties {
        results.push(check_property(machine, graph, prop));
    }
    results
}

fn trace_json(spec_vars: &[String], trace: &Trace) -> Json {
    let states: Vec<Json> = trace
        .states
        .iter()
        .map(|s| {
            let mut m = Map::new();
            for (name, v) in spec_vars.iter().zip(s.values()) {
                m.insert(name.clone(), value_json(v));
            }
            Json::Object(m)
        })
        .collect();
    json!({
        "states": states,
        "actions": trace.actions,
        "loop_start": trace.loop_start,
        "loop_action": trace.loop_action,
    })
}

fn value_json(v: &Value) -> Json {
    serde_json::to_value(v).expect("values serialize")
}

pub fn emit_json(report: &Report) -> String {
    let mut constants = Map::new();
    for (name, v) in &report.constants {
        constants.insert(name.clone(), value_json(v));
    }
    let results: Vec<Json> = report
        .results
        .iter()
        .map(|v| {
            json!({
                "name": v.name,
                "kind": v.kind.as_str(),
                "status": v.status.as_str(),
                "binder": v.binder.as_ref().map(value_json),
                "trace": v.trace.as_ref().map(|t| trace_json(&report.variables, t)),
                "detail": v.detail,
            })
        })
        .collect();
    let doc = json!({
        "spec": report.spec,
        "constants": constants,
        "states": report.states,
        "transitions": report.transitions,
        "elapsed_ms": report.elapsed_ms,
        "results": results,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

pub fn render_trace(out: &mut String, variables: &[String], trace: &Trace) {
    for (i, state) in trace.states.iter().enumerate() {
        if i > 0 {
            writeln!(out, "    -- {} -->", trace.actions[i - 1]).unwrap();
        }
        writeln!(out, "  State {}:", i + 1).unwrap();
        for (name, v) in variables.iter().zip(state.values()) {
            writeln!(out, "    {name} = {v}").unwrap();
        }
    }
    if let Some(start) = trace.loop_start {
        match &trace.loop_action {
            Some(a) => writeln!(out, "  loop to state {} (via {a})", start + 1).unwrap(),
            None => writeln!(out, "  loop to state {} (stuttering)", start + 1).unwrap(),
        }
    }
}

pub fn emit_text(report: &Report) -> String {
    let mut out = String::new();
    write!(out, "spec {}", report.spec).unwrap();
    if !report.constants.is_empty() {
        let consts: Vec<String> = report
            .constants
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        write!(out, " ({})", consts.join(", ")).unwrap();
    }
    out.push('\n');
    writeln!(
        out,
        "{} states, {} transitions, {:.1} ms",
        report.states, report.transitions, report.elapsed_ms
    )
    .unwrap();
    for v in &report.results {
        let binder = match &v.binder {
            Some(b) => format!(" [{b}]"),
            None => String::new(),
        };
        writeln!(
            out,
            "{:<5} {} ({}){binder}: {}",
            v.status.as_str(),
            v.name,
            v.kind.as_str(),
            v.detail
        )
        .unwrap();
        if let (Status::Fail, Some(trace)) = (v.status, &v.trace) {
            render_trace(&mut out, &report.variables, trace);
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: nodes in index order, initial states double-circled.
pub fn emit_dot(spec: &SpecModel, graph: &StateGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", dot_escape(&spec.name)).unwrap();
    writeln!(out, "  node [shape=box];").unwrap();
    for (idx, state) in graph.states.iter().enumerate() {
        let rec = state_to_record(state, spec);
        let fields: Vec<String> = rec.0.iter().map(|(n, v)| format!("{n}={v}")).collect();
        let label = dot_escape(&format!("{idx}\n{}", fields.join(",")));
        let label = label.replace('\n', "\\n");
        let shape = if graph.is_initial(idx) {
            ", shape=doublecircle"
        } else {
            ""
        };
        writeln!(out, "  {idx} [label=\"{label}\"{shape}];").unwrap();
    }
    for (idx, edges) in graph.edges.iter().enumerate() {
        for e in edges {
            writeln!(
                out,
                "  {idx} -> {} [label=\"{}\"];",
                e.target,
                dot_escape(graph.action_name(e.action))
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}
