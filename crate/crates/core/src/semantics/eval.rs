use std::collections::HashSet;

use thiserror::Error;

use crate::model::{
    state_to_record, BinOp, Expr, InitClause, Record, SetExpr, Span, SpecModel, State,
};
use crate::value::{Kind, Value};

use super::ir::{CExpr, CSet, CStmt, Compiled, Resolver};
use super::validate::{validate, Scope, StaticError, Validator};
use super::BoundSpec;

/// Upper bound on the number of elements an evaluated set may have.
const MAX_SET_LEN: i128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: in {context}: {message}")]
pub struct EvalError {
    pub message: String,
    pub context: String,
    pub line: u32,
    pub column: u32,
    /// The state being evaluated, when there is one.
    pub state: Option<Record>,
}

/// Evaluation environment for ad-hoc expressions: a state plus named binder values.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub state: &'a State,
    pub binders: &'a [(String, Value)],
}

struct Fault {
    message: String,
    span: Span,
}

type Eval<T> = Result<T, Fault>;

#[derive(Debug, Clone)]
enum CInit {
    Value(CExpr),
    In(CSet),
}

#[derive(Debug, Clone)]
struct CAction {
    name: String,
    guards: Vec<CExpr>,
    body: Vec<CStmt>,
}

/// Remaining statements to run after the current block finishes.
enum Cont<'a> {
    Done,
    Then(&'a [CStmt], &'a Cont<'a>),
}

/// A validated, bound and compiled spec: the executable next-state relation.
#[derive(Debug, Clone)]
pub struct Machine {
    bound: BoundSpec,
    init: Vec<CInit>,
    domains: Vec<Option<Vec<Value>>>,
    actions: Vec<CAction>,
}

impl Machine {
    pub fn new(bound: BoundSpec) -> Result<Machine, Vec<StaticError>> {
        validate(&bound)?;
        let resolver = Resolver::new(&bound.spec, &bound.constant_values);
        let init = bound
            .spec
            .variables
            .iter()
            .map(|v| match &v.init {
                InitClause::Value(e) => CInit::Value(resolver.expr(e)),
                InitClause::In(s) => CInit::In(resolver.set(s)),
            })
            .collect();
        let empty = State::new(Vec::new());
        let mut domains = Vec::new();
        for v in &bound.spec.variables {
            let domain = match &v.domain {
                Some(s) => Some(eval_set(&resolver.set(s), &empty, &[]).map_err(|f| {
                    vec![StaticError {
                        message: f.message,
                        context: format!("variable {}", v.name),
                        line: f.span.line,
                        column: f.span.column,
                    }]
                })?),
                None => None,
            };
            domains.push(domain);
        }
        let actions = bound
            .spec
            .actions
            .iter()
            .map(|a| {
                let mut r = Resolver::new(&bound.spec, &bound.constant_values);
                CAction {
                    name: a.name.clone(),
                    guards: a.guards.iter().map(|g| r.expr(g)).collect(),
                    body: r.block(&a.body),
                }
            })
            .collect();
        Ok(Machine {
            bound,
            init,
            domains,
            actions,
        })
    }

    pub fn spec(&self) -> &SpecModel {
        &self.bound.spec
    }

    pub fn bound(&self) -> &BoundSpec {
        &self.bound
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.actions.iter().map(|a| a.name.as_str())
    }

    pub fn action_name(&self, action: usize) -> &str {
        &self.actions[action].name
    }

    fn error(&self, fault: Fault, context: &str, state: Option<&State>) -> EvalError {
        EvalError {
            message: fault.message,
            context: context.to_string(),
            line: fault.span.line,
            column: fault.span.column,
            state: state.map(|s| state_to_record(s, &self.bound.spec)),
        }
    }

    /// Compiles a state expression in which the given binders are in scope.
    pub fn compile_expr(
        &self,
        expr: &Expr,
        binders: &[(&str, Kind)],
        context: &str,
    ) -> Result<Compiled, Vec<StaticError>> {
        let mut scope = Scope::state();
        for (name, kind) in binders {
            scope = scope.with(name, *kind);
        }
        let mut v = Validator::new(&self.bound.spec, context);
        let kind = v.check(expr, &scope);
        match kind {
            Some(kind) if v.errors.is_empty() => {
                let mut r = Resolver::new(&self.bound.spec, &self.bound.constant_values);
                r.binders = binders.iter().map(|(n, _)| n.to_string()).collect();
                Ok(Compiled {
                    expr: r.expr(expr),
                    kind,
                })
            }
            _ => Err(v.errors),
        }
    }

    /// Like [`Machine::compile_expr`] but additionally requires a boolean result.
    pub fn compile_predicate(
        &self,
        expr: &Expr,
        binders: &[(&str, Kind)],
        context: &str,
    ) -> Result<Compiled, Vec<StaticError>> {
        let compiled = self.compile_expr(expr, binders, context)?;
        if compiled.kind != Kind::Bool {
            return Err(vec![StaticError {
                message: format!("expected bool expression, found {}", compiled.kind),
                context: context.to_string(),
                line: expr.span.line,
                column: expr.span.column,
            }]);
        }
        Ok(compiled)
    }

    pub fn eval_compiled(
        &self,
        compiled: &Compiled,
        state: &State,
        binders: &[Value],
        context: &str,
    ) -> Result<Value, EvalError> {
        eval(&compiled.expr, state, binders).map_err(|f| self.error(f, context, Some(state)))
    }

    pub fn eval_predicate(
        &self,
        compiled: &Compiled,
        state: &State,
        binders: &[Value],
        context: &str,
    ) -> Result<bool, EvalError> {
        let v = self.eval_compiled(compiled, state, binders, context)?;
        v.as_bool().ok_or_else(|| EvalError {
            message: format!("predicate evaluated to non-boolean {v}"),
            context: context.to_string(),
            line: 0,
            column: 0,
            state: Some(state_to_record(state, &self.bound.spec)),
        })
    }

    fn static_to_eval(&self, errors: Vec<StaticError>, env: &Env) -> EvalError {
        let first = errors.into_iter().next().expect("at least one error");
        EvalError {
            message: first.message,
            context: first.context,
            line: first.line,
            column: first.column,
            state: Some(state_to_record(env.state, &self.bound.spec)),
        }
    }

    /// Evaluates an arbitrary expression in `env`; unresolved names are errors.
    pub fn eval_expr(&self, expr: &Expr, env: &Env) -> Result<Value, EvalError> {
        let kinds: Vec<(&str, Kind)> = env
            .binders
            .iter()
            .map(|(n, v)| (n.as_str(), v.kind()))
            .collect();
        let compiled = self
            .compile_expr(expr, &kinds, "expression")
            .map_err(|e| self.static_to_eval(e, env))?;
        let values: Vec<Value> = env.binders.iter().map(|(_, v)| v.clone()).collect();
        self.eval_compiled(&compiled, env.state, &values, "expression")
    }

    /// Evaluates a set expression to its distinct elements in written order.
    pub fn eval_set(&self, set: &SetExpr, env: &Env) -> Result<Vec<Value>, EvalError> {
        let mut scope = Scope::state();
        for (n, v) in env.binders {
            scope = scope.with(n, v.kind());
        }
        let mut v = Validator::new(&self.bound.spec, "set expression");
        v.check_set(set, &scope);
        if !v.errors.is_empty() {
            return Err(self.static_to_eval(v.errors, env));
        }
        let mut r = Resolver::new(&self.bound.spec, &self.bound.constant_values);
        r.binders = env.binders.iter().map(|(n, _)| n.clone()).collect();
        let values: Vec<Value> = env.binders.iter().map(|(_, v)| v.clone()).collect();
        eval_set(&r.set(set), env.state, &values)
            .map_err(|f| self.error(f, "set expression", Some(env.state)))
    }

    /// Evaluates a set that may mention only constants (property binder sets).
    pub fn eval_constant_set(&self, set: &SetExpr, context: &str) -> Result<Vec<Value>, EvalError> {
        let mut v = Validator::new(&self.bound.spec, context);
        v.check_set(set, &Scope::constants_only());
        if let Some(e) = v.errors.into_iter().next() {
            return Err(EvalError {
                message: e.message,
                context: e.context,
                line: e.line,
                column: e.column,
                state: None,
            });
        }
        let r = Resolver::new(&self.bound.spec, &self.bound.constant_values);
        eval_set(&r.set(set), &State::new(Vec::new()), &[])
            .map_err(|f| self.error(f, context, None))
    }

    fn check_domain(&self, var: usize, value: &Value, span: Span) -> Eval<()> {
        if let Some(domain) = &self.domains[var] {
            if !domain.contains(value) {
                return Err(Fault {
                    message: format!(
                        "value {value} of `{}` is outside its domain",
                        self.bound.spec.variables[var].name
                    ),
                    span,
                });
            }
        }
        Ok(())
    }

    /// Cartesian product of the init clauses, lexicographic in declaration order.
    pub fn initial_states(&self) -> Result<Vec<State>, EvalError> {
        let empty = State::new(Vec::new());
        let mut choices = Vec::with_capacity(self.init.len());
        for (idx, (init, decl)) in self.init.iter().zip(&self.bound.spec.variables).enumerate() {
            let context = format!("initial value of {}", decl.name);
            let values = match init {
                CInit::Value(e) => {
                    vec![eval(e, &empty, &[]).map_err(|f| self.error(f, &context, None))?]
                }
                CInit::In(s) => {
                    eval_set(s, &empty, &[]).map_err(|f| self.error(f, &context, None))?
                }
            };
            for v in &values {
                self.check_domain(idx, v, decl.span)
                    .map_err(|f| self.error(f, &context, None))?;
            }
            choices.push(values);
        }
        let mut states = vec![Vec::with_capacity(choices.len())];
        for values in &choices {
            let mut next = Vec::with_capacity(states.len() * values.len());
            for prefix in &states {
                for v in values {
                    let mut s = prefix.clone();
                    s.push(v.clone());
                    next.push(s);
                }
            }
            states = next;
        }
        Ok(states.into_iter().map(State::new).collect())
    }

    /// Successors of `state` under one action: empty when a guard is false, one state
    /// per combination of `any` choices otherwise, duplicates merged.
    pub fn action_successors(&self, state: &State, action: usize) -> Result<Vec<State>, EvalError> {
        let act = &self.actions[action];
        let context = format!("action {}", act.name);
        let wrap = |f: Fault| self.error(f, &context, Some(state));
        for g in &act.guards {
            match eval(g, state, &[]).map_err(wrap)? {
                Value::Bool(true) => {}
                _ => return Ok(Vec::new()),
            }
        }
        let mut out = Vec::new();
        let mut binders = Vec::new();
        self.run(
            &act.body,
            &Cont::Done,
            &mut binders,
            state,
            state.clone(),
            &mut out,
        )
        .map_err(wrap)?;
        if out.len() > 1 {
            let mut seen = HashSet::with_capacity(out.len());
            out.retain(|s| seen.insert(s.clone()));
        }
        Ok(out)
    }

    /// All labelled successors, actions in declaration order.
    pub fn successors(&self, state: &State) -> Result<Vec<(usize, State)>, EvalError> {
        let mut out = Vec::new();
        for action in 0..self.actions.len() {
            for s in self.action_successors(state, action)? {
                out.push((action, s));
            }
        }
        Ok(out)
    }

    fn run(
        &self,
        stmts: &[CStmt],
        cont: &Cont,
        binders: &mut Vec<Value>,
        current: &State,
        mut next: State,
        out: &mut Vec<State>,
    ) -> Eval<()> {
        for (i, stmt) in stmts.iter().enumerate() {
            match stmt {
                CStmt::Assign { var, value, span } => {
                    let v = eval(value, current, binders)?;
                    self.check_domain(*var, &v, *span)?;
                    next.set(*var, v);
                }
                CStmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let rest = Cont::Then(&stmts[i + 1..], cont);
                    let branch = if truth(eval(cond, current, binders)?)? {
                        then_branch
                    } else {
                        else_branch
                    };
                    return self.run(branch, &rest, binders, current, next, out);
                }
                CStmt::Any { slot, set, body } => {
                    let rest = Cont::Then(&stmts[i + 1..], cont);
                    for v in eval_set(set, current, binders)? {
                        binders.truncate(*slot);
                        binders.push(v);
                        self.run(body, &rest, binders, current, next.clone(), out)?;
                    }
                    return Ok(());
                }
            }
        }
        match cont {
            Cont::Done => {
                out.push(next);
                Ok(())
            }
            Cont::Then(stmts, cont) => self.run(stmts, cont, binders, current, next, out),
        }
    }
}

fn truth(v: Value) -> Eval<bool> {
    v.as_bool().ok_or_else(|| Fault {
        message: format!("expected a boolean, found {v}"),
        span: Span::default(),
    })
}

fn int(v: Value, span: Span) -> Eval<i64> {
    v.as_int().ok_or_else(|| Fault {
        message: format!("expected an integer, found {v}"),
        span,
    })
}

fn eval(e: &CExpr, state: &State, binders: &[Value]) -> Eval<Value> {
    Ok(match e {
        CExpr::Lit(v) => v.clone(),
        CExpr::Var(i) => state.get(*i).clone(),
        CExpr::Binder(i) => binders[*i].clone(),
        CExpr::Not(x) => Value::Bool(!truth(eval(x, state, binders)?)?),
        CExpr::And(l, r) => {
            Value::Bool(truth(eval(l, state, binders)?)? && truth(eval(r, state, binders)?)?)
        }
        CExpr::Or(l, r) => {
            Value::Bool(truth(eval(l, state, binders)?)? || truth(eval(r, state, binders)?)?)
        }
        CExpr::Implies(l, r) => {
            Value::Bool(!truth(eval(l, state, binders)?)? || truth(eval(r, state, binders)?)?)
        }
        CExpr::Eq(l, r) => Value::Bool(eval(l, state, binders)? == eval(r, state, binders)?),
        CExpr::Ne(l, r) => Value::Bool(eval(l, state, binders)? != eval(r, state, binders)?),
        CExpr::Int(op, l, r, span) => {
            let a = int(eval(l, state, binders)?, *span)?;
            let b = int(eval(r, state, binders)?, *span)?;
            let overflow = || Fault {
                message: format!("integer overflow in {a} {} {b}", op.symbol()),
                span: *span,
            };
            match op {
                BinOp::Lt => Value::Bool(a < b),
                BinOp::Le => Value::Bool(a <= b),
                BinOp::Gt => Value::Bool(a > b),
                BinOp::Ge => Value::Bool(a >= b),
                BinOp::Add => Value::Int(a.checked_add(b).ok_or_else(overflow)?),
                BinOp::Sub => Value::Int(a.checked_sub(b).ok_or_else(overflow)?),
                BinOp::Mul => Value::Int(a.checked_mul(b).ok_or_else(overflow)?),
                _ => unreachable!("non-integer operator compiled as integer op"),
            }
        }
        CExpr::In(x, set) => {
            let v = eval(x, state, binders)?;
            match &**set {
                CSet::Range(lo, hi, span) => {
                    let lo = int(eval(lo, state, binders)?, *span)?;
                    let hi = int(eval(hi, state, binders)?, *span)?;
                    Value::Bool(v.as_int().is_some_and(|i| lo <= i && i <= hi))
                }
                CSet::Enum(items) => {
                    let mut found = false;
                    for item in items {
                        if eval(item, state, binders)? == v {
                            found = true;
                            break;
                        }
                    }
                    Value::Bool(found)
                }
            }
        }
        CExpr::If(c, t, f) => {
            if truth(eval(c, state, binders)?)? {
                eval(t, state, binders)?
            } else {
                eval(f, state, binders)?
            }
        }
    })
}

fn eval_set(set: &CSet, state: &State, binders: &[Value]) -> Eval<Vec<Value>> {
    match set {
        CSet::Range(lo, hi, span) => {
            let lo = int(eval(lo, state, binders)?, *span)?;
            let hi = int(eval(hi, state, binders)?, *span)?;
            if (hi as i128) - (lo as i128) >= MAX_SET_LEN {
                return Err(Fault {
                    message: format!("range {lo}..{hi} is too large to enumerate"),
                    span: *span,
                });
            }
            Ok((lo..=hi).map(Value::Int).collect())
        }
        CSet::Enum(items) => {
            let mut out: Vec<Value> = Vec::with_capacity(items.len());
            for item in items {
                let v = eval(item, state, binders)?;
                if let Some(first) = out.first() {
                    if first.kind() != v.kind() {
                        return Err(Fault {
                            message: format!(
                                "set mixes {} and {} elements",
                                first.kind(),
                                v.kind()
                            ),
                            span: Span::default(),
                        });
                    }
                }
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            Ok(out)
        }
    }
}
