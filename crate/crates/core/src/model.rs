//! The shared data model: specification AST, states and state identity.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::value::{Kind, Value};

/// 1-based source location carried by AST nodes.
///
/// Positions are metadata: they never take part in AST equality or hashing, so a
/// reparsed pretty-printed spec compares equal to the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Span { line, column }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Implies,
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "implies",
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    /// Binding strength; larger binds tighter. `not` sits between `and` and comparisons.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul => 7,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 5
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Lit(Value),
    Ident(String),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    In(Box<Expr>, Box<SetExpr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn lit(value: Value) -> Self {
        Expr::new(ExprKind::Lit(value), Span::default())
    }

    pub fn ident(name: &str) -> Self {
        Expr::new(ExprKind::Ident(name.to_string()), Span::default())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        let span = lhs.span;
        Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span)
    }
}

/// Finite set expression: inclusive integer range or an enumerated literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetExpr {
    Range(Expr, Expr),
    Enum(Vec<Expr>),
}

impl SetExpr {
    pub fn span(&self) -> Span {
        match self {
            SetExpr::Range(lo, _) => lo.span,
            SetExpr::Enum(items) => items.first().map(|e| e.span).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    /// `v' = expr`
    Assign { var: String, value: Expr },
    /// `any x in S { ... }`
    Any {
        binder: String,
        set: SetExpr,
        body: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstDecl {
    pub name: String,
    pub kind: Kind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InitClause {
    /// `init expr`
    Value(Expr),
    /// `init in S`
    In(SetExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub kind: Kind,
    pub domain: Option<SetExpr>,
    pub init: InitClause,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionDef {
    pub name: String,
    /// Conjoined `when` clauses.
    pub guards: Vec<Expr>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Invariant(Expr),
    Eventually(Expr),
    LeadsTo(Expr, Expr),
    AlwaysEventually(Expr),
}

impl Shape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Shape::Invariant(_) => "invariant",
            Shape::Eventually(_) => "eventually",
            Shape::LeadsTo(..) => "leadsto",
            Shape::AlwaysEventually(_) => "always_eventually",
        }
    }
}

/// `forall var in set :` prefix of a property.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binder {
    pub var: String,
    pub set: SetExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TemporalProperty {
    pub name: String,
    pub binder: Option<Binder>,
    pub shape: Shape,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecModel {
    pub name: String,
    pub constants: Vec<ConstDecl>,
    /// Declaration order defines the state layout.
    pub variables: Vec<VarDecl>,
    pub actions: Vec<ActionDef>,
    pub properties: Vec<TemporalProperty>,
}

impl SpecModel {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }
}

/// One valuation of all declared variables, aligned with declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State(Vec<Value>);

impl State {
    pub fn new(values: Vec<Value>) -> Self {
        State(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [Value] {
        &mut self.0
    }

    pub fn get(&self, index: usize) -> &Value {
        &self.0[index]
    }

    pub fn set(&mut self, index: usize, value: Value) {
        self.0[index] = value;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Deterministic, injective serialization used for visited-state deduplication.
    ///
    /// Every value is written as a tag byte followed by a fixed-width or
    /// length-prefixed payload, so distinct value sequences never collide.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut key = Vec::with_capacity(self.0.len() * 9);
        for value in &self.0 {
            match value {
                Value::Bool(b) => {
                    key.push(0);
                    key.push(*b as u8);
                }
                Value::Int(i) => {
                    key.push(1);
                    key.extend_from_slice(&i.to_be_bytes());
                }
                Value::Str(s) => {
                    key.push(2);
                    key.extend_from_slice(&(s.len() as u32).to_be_bytes());
                    key.extend_from_slice(s.as_bytes());
                }
            }
        }
        key
    }
}

pub fn canonical_key(state: &State, spec: &SpecModel) -> Vec<u8> {
    debug_assert_eq!(state.len(), spec.variables.len());
    state.canonical_key()
}

/// Ordered `name -> value` view of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, value)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={value}")?;
        }
        Ok(())
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, value) in &self.0 {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}

pub fn state_to_record(state: &State, spec: &SpecModel) -> Record {
    Record(
        spec.variables
            .iter()
            .zip(state.values())
            .map(|(decl, value)| (decl.name.clone(), value.clone()))
            .collect(),
    )
}
