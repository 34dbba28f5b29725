use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::model::{BinOp, Expr, ExprKind, InitClause, SetExpr, Span, SpecModel, Stmt, StmtKind};
use crate::value::Kind;

use super::BoundSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticError {
    pub message: String,
    /// Where the error occurred, e.g. `action Check` or `property Liveness`.
    pub context: String,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for StaticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.context.is_empty() {
            write!(f, "{}:{}: {}", self.line, self.column, self.message)
        } else {
            write!(
                f,
                "{}:{}: in {}: {}",
                self.line, self.column, self.context, self.message
            )
        }
    }
}

impl std::error::Error for StaticError {}

pub fn validate(bound: &BoundSpec) -> Result<(), Vec<StaticError>> {
    validate_model(&bound.spec)
}

/// Checks name resolution, kinds, assignment discipline and scoping. Reports every
/// violation found, not just the first.
pub fn validate_model(spec: &SpecModel) -> Result<(), Vec<StaticError>> {
    let mut v = Validator {
        spec,
        errors: Vec::new(),
        context: String::new(),
    };
    v.run();
    if v.errors.is_empty() {
        Ok(())
    } else {
        Err(v.errors)
    }
}

#[derive(Clone, Default)]
pub(super) struct Scope {
    pub allow_vars: bool,
    pub binders: Vec<(String, Kind)>,
}

impl Scope {
    pub fn constants_only() -> Self {
        Scope::default()
    }

    pub fn state() -> Self {
        Scope {
            allow_vars: true,
            binders: Vec::new(),
        }
    }

    pub fn with(&self, name: &str, kind: Kind) -> Self {
        let mut s = self.clone();
        s.binders.push((name.to_string(), kind));
        s
    }
}

pub(super) struct Validator<'a> {
    pub spec: &'a SpecModel,
    pub errors: Vec<StaticError>,
    pub context: String,
}

impl<'a> Validator<'a> {
    pub fn new(spec: &'a SpecModel, context: &str) -> Self {
        Validator {
            spec,
            errors: Vec::new(),
            context: context.to_string(),
        }
    }

    fn error(&mut self, span: Span, message: impl Into<String>) {
        self.errors.push(StaticError {
            message: message.into(),
            context: self.context.clone(),
            line: span.line,
            column: span.column,
        });
    }

    fn run(&mut self) {
        let spec = self.spec;
        if spec.variables.is_empty() {
            self.error(Span::new(1, 1), "a spec needs at least one variable");
        }
        if spec.actions.is_empty() {
            self.error(Span::new(1, 1), "a spec needs at least one action");
        }

        let mut names = HashSet::new();
        for c in &spec.constants {
            if !names.insert(c.name.as_str()) {
                self.error(c.span, format!("`{}` is declared more than once", c.name));
            }
        }
        for var in &spec.variables {
            if !names.insert(var.name.as_str()) {
                self.error(
                    var.span,
                    format!("`{}` is declared more than once", var.name),
                );
            }
        }
        let mut action_names = HashSet::new();
        for a in &spec.actions {
            if !action_names.insert(a.name.as_str()) {
                self.error(
                    a.span,
                    format!("action `{}` is declared more than once", a.name),
                );
            }
        }
        let mut prop_names = HashSet::new();
        for p in &spec.properties {
            if !prop_names.insert(p.name.as_str()) {
                self.error(
                    p.span,
                    format!("property `{}` is declared more than once", p.name),
                );
            }
        }

        for var in &spec.variables {
            self.context = format!("variable {}", var.name);
            let scope = Scope::constants_only();
            if let Some(domain) = &var.domain {
                self.expect_set(domain, var.kind, &scope);
            }
            match &var.init {
                InitClause::Value(e) => self.expect(e, var.kind, &scope),
                InitClause::In(s) => self.expect_set(s, var.kind, &scope),
            }
        }

        for a in &spec.actions {
            self.context = format!("action {}", a.name);
            let scope = Scope::state();
            for g in &a.guards {
                self.expect(g, Kind::Bool, &scope);
            }
            self.check_block(&a.body, &scope);
            let mut reported = HashSet::new();
            self.assignment_paths(&a.body, vec![BTreeMap::new()], &mut reported);
        }

        for p in &spec.properties {
            self.context = format!("property {}", p.name);
            let mut scope = Scope::state();
            if let Some(b) = &p.binder {
                let kind = self.check_set(&b.set, &Scope::constants_only());
                if self.is_taken(&b.var, &scope) {
                    self.error(
                        p.span,
                        format!("binder `{}` shadows an existing name", b.var),
                    );
                }
                if let Some(kind) = kind {
                    scope = scope.with(&b.var, kind);
                } else {
                    continue;
                }
            }
            match &p.shape {
                crate::model::Shape::Invariant(e)
                | crate::model::Shape::Eventually(e)
                | crate::model::Shape::AlwaysEventually(e) => self.expect(e, Kind::Bool, &scope),
                crate::model::Shape::LeadsTo(l, r) => {
                    self.expect(l, Kind::Bool, &scope);
                    self.expect(r, Kind::Bool, &scope);
                }
            }
        }
    }

    fn is_taken(&self, name: &str, scope: &Scope) -> bool {
        self.spec.variable_index(name).is_some()
            || self.spec.constant_index(name).is_some()
            || scope.binders.iter().any(|(b, _)| b == name)
    }

    fn check_block(&mut self, stmts: &[Stmt], scope: &Scope) {
        for s in stmts {
            match &s.kind {
                StmtKind::Assign { var, value } => {
                    if let Some(idx) = self.spec.variable_index(var) {
                        let kind = self.spec.variables[idx].kind;
                        self.expect(value, kind, scope);
                    } else {
                        if self.spec.constant_index(var).is_some() {
                            self.error(s.span, format!("cannot assign to constant `{var}`"));
                        } else if scope.binders.iter().any(|(b, _)| b == var) {
                            self.error(s.span, format!("cannot assign to bound name `{var}`"));
                        } else {
                            self.error(s.span, format!("unknown variable `{var}`"));
                        }
                        self.check(value, scope);
                    }
                }
                StmtKind::Any { binder, set, body } => {
                    if self.is_taken(binder, scope) {
                        self.error(
                            s.span,
                            format!("binder `{binder}` shadows an existing name"),
                        );
                    }
                    if let Some(kind) = self.check_set(set, scope) {
                        self.check_block(body, &scope.with(binder, kind));
                    }
                }
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    self.expect(cond, Kind::Bool, scope);
                    self.check_block(then_branch, scope);
                    if let Some(els) = else_branch {
                        self.check_block(els, scope);
                    }
                }
            }
        }
    }

    /// Threads the set of already-assigned variables along every execution path and
    /// reports a second assignment to the same variable on any one path.
    fn assignment_paths(
        &mut self,
        stmts: &[Stmt],
        mut paths: Vec<BTreeMap<String, Span>>,
        reported: &mut HashSet<(u32, u32, String)>,
    ) -> Vec<BTreeMap<String, Span>> {
        for s in stmts {
            match &s.kind {
                StmtKind::Assign { var, .. } => {
                    for path in &mut paths {
                        if let Some(first) = path.get(var) {
                            let msg = format!(
                                "`{var}'` is assigned twice on one path (first assignment at {first})"
                            );
                            if reported.insert((s.span.line, s.span.column, msg.clone())) {
                                self.error(s.span, msg);
                            }
                        } else {
                            path.insert(var.clone(), s.span);
                        }
                    }
                }
                StmtKind::Any { body, .. } => {
                    paths = self.assignment_paths(body, paths, reported);
                }
                StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    let mut taken = self.assignment_paths(then_branch, paths.clone(), reported);
                    let skipped = match else_branch {
                        Some(els) => self.assignment_paths(els, paths, reported),
                        None => paths,
                    };
                    taken.extend(skipped);
                    paths = taken;
                }
            }
            dedup_paths(&mut paths);
        }
        paths
    }

    pub fn expect(&mut self, e: &Expr, kind: Kind, scope: &Scope) {
        if let Some(found) = self.check(e, scope) {
            if found != kind {
                self.error(e.span, format!("expected {kind} expression, found {found}"));
            }
        }
    }

    fn expect_set(&mut self, s: &SetExpr, kind: Kind, scope: &Scope) {
        if let Some(found) = self.check_set(s, scope) {
            if found != kind {
                self.error(
                    s.span(),
                    format!("expected a set of {kind}, found a set of {found}"),
                );
            }
        }
    }

    /// Element kind of a set expression.
    pub fn check_set(&mut self, s: &SetExpr, scope: &Scope) -> Option<Kind> {
        match s {
            SetExpr::Range(lo, hi) => {
                self.expect(lo, Kind::Int, scope);
                self.expect(hi, Kind::Int, scope);
                Some(Kind::Int)
            }
            SetExpr::Enum(items) => {
                let kinds: Vec<_> = items
                    .iter()
                    .map(|e| (e.span, self.check(e, scope)))
                    .collect();
                let first = kinds.iter().find_map(|(_, k)| *k)?;
                let mut ok = true;
                for (span, k) in kinds {
                    match k {
                        Some(k) if k != first => {
                            self.error(span, format!("set mixes {first} and {k} elements"));
                            ok = false;
                        }
                        None => ok = false,
                        _ => {}
                    }
                }
                ok.then_some(first)
            }
        }
    }

    /// Kind of an expression, or `None` after reporting an error.
    pub fn check(&mut self, e: &Expr, scope: &Scope) -> Option<Kind> {
        match &e.kind {
            ExprKind::Lit(v) => Some(v.kind()),
            ExprKind::Ident(name) => {
                if let Some((_, k)) = scope.binders.iter().rev().find(|(b, _)| b == name) {
                    return Some(*k);
                }
                if let Some(idx) = self.spec.variable_index(name) {
                    if !scope.allow_vars {
                        self.error(
                            e.span,
                            format!("state variable `{name}` is not allowed here (constants only)"),
                        );
                        return None;
                    }
                    return Some(self.spec.variables[idx].kind);
                }
                if let Some(idx) = self.spec.constant_index(name) {
                    return Some(self.spec.constants[idx].kind);
                }
                self.error(e.span, format!("unknown identifier `{name}`"));
                None
            }
            ExprKind::Not(inner) => {
                self.expect(inner, Kind::Bool, scope);
                Some(Kind::Bool)
            }
            ExprKind::Binary(op, lhs, rhs) => match op {
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    self.expect(lhs, Kind::Bool, scope);
                    self.expect(rhs, Kind::Bool, scope);
                    Some(Kind::Bool)
                }
                BinOp::Eq | BinOp::Ne => {
                    let l = self.check(lhs, scope);
                    let r = self.check(rhs, scope);
                    if let (Some(l), Some(r)) = (l, r) {
                        if l != r {
                            self.error(e.span, format!("cannot compare {l} with {r}"));
                        }
                    }
                    Some(Kind::Bool)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    self.expect(lhs, Kind::Int, scope);
                    self.expect(rhs, Kind::Int, scope);
                    Some(Kind::Bool)
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    self.expect(lhs, Kind::Int, scope);
                    self.expect(rhs, Kind::Int, scope);
                    Some(Kind::Int)
                }
            },
            ExprKind::In(lhs, set) => {
                let l = self.check(lhs, scope);
                let s = self.check_set(set, scope);
                if let (Some(l), Some(s)) = (l, s) {
                    if l != s {
                        self.error(e.span, format!("membership of {l} in a set of {s}"));
                    }
                }
                Some(Kind::Bool)
            }
            ExprKind::If(c, t, f) => {
                self.expect(c, Kind::Bool, scope);
                let t = self.check(t, scope);
                let fk = self.check(f, scope);
                match (t, fk) {
                    (Some(t), Some(fk)) if t != fk => {
                        self.error(
                            f.span,
                            format!("conditional branches have kinds {t} and {fk}"),
                        );
                        None
                    }
                    (Some(t), Some(_)) => Some(t),
                    _ => None,
                }
            }
        }
    }
}

fn dedup_paths(paths: &mut Vec<BTreeMap<String, Span>>) {
    let mut seen = HashSet::new();
    paths.retain(|p| {
        seen.insert(
            p.iter()
                .map(|(k, s)| (k.clone(), s.line, s.column))
                .collect::<Vec<_>>(),
        )
    });
}
