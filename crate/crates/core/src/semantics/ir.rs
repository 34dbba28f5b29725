//! Name-resolved form of validated expressions and statements.
//!
//! Variables become state slots, constants are folded into literals and binders
//! become stack slots numbered by nesting depth.

use crate::model::{BinOp, Expr, ExprKind, SetExpr, Span, SpecModel, Stmt, StmtKind};
use crate::value::{Kind, Value};

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Lit(Value),
    Var(usize),
    Binder(usize),
    Not(Box<CExpr>),
    And(Box<CExpr>, Box<CExpr>),
    Or(Box<CExpr>, Box<CExpr>),
    Implies(Box<CExpr>, Box<CExpr>),
    Eq(Box<CExpr>, Box<CExpr>),
    Ne(Box<CExpr>, Box<CExpr>),
    /// Integer ordering and arithmetic; the span locates overflow errors.
    Int(BinOp, Box<CExpr>, Box<CExpr>, Span),
    In(Box<CExpr>, Box<CSet>),
    If(Box<CExpr>, Box<CExpr>, Box<CExpr>),
}

#[derive(Debug, Clone)]
pub(crate) enum CSet {
    Range(CExpr, CExpr, Span),
    Enum(Vec<CExpr>),
}

#[derive(Debug, Clone)]
pub(crate) enum CStmt {
    Assign {
        var: usize,
        value: CExpr,
        span: Span,
    },
    Any {
        slot: usize,
        set: CSet,
        body: Vec<CStmt>,
    },
    If {
        cond: CExpr,
        then_branch: Vec<CStmt>,
        else_branch: Vec<CStmt>,
    },
}

/// A compiled state expression together with its static kind.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub(crate) expr: CExpr,
    pub kind: Kind,
}

pub(crate) struct Resolver<'a> {
    pub spec: &'a SpecModel,
    pub constants: &'a [Value],
    pub binders: Vec<String>,
}

impl<'a> Resolver<'a> {
    pub fn new(spec: &'a SpecModel, constants: &'a [Value]) -> Self {
        Resolver {
            spec,
            constants,
            binders: Vec::new(),
        }
    }

    pub fn expr(&self, e: &Expr) -> CExpr {
        let bx = |x: &Expr| Box::new(self.expr(x));
        match &e.kind {
            ExprKind::Lit(v) => CExpr::Lit(v.clone()),
            ExprKind::Ident(name) => {
                if let Some(slot) = self.binders.iter().rposition(|b| b == name) {
                    CExpr::Binder(slot)
                } else if let Some(idx) = self.spec.variable_index(name) {
                    CExpr::Var(idx)
                } else {
                    let idx = self
                        .spec
                        .constant_index(name)
                        .expect("identifiers are resolved by validation");
                    CExpr::Lit(self.constants[idx].clone())
                }
            }
            ExprKind::Not(inner) => CExpr::Not(bx(inner)),
            ExprKind::Binary(op, l, r) => match op {
                BinOp::And => CExpr::And(bx(l), bx(r)),
                BinOp::Or => CExpr::Or(bx(l), bx(r)),
                BinOp::Implies => CExpr::Implies(bx(l), bx(r)),
                BinOp::Eq => CExpr::Eq(bx(l), bx(r)),
                BinOp::Ne => CExpr::Ne(bx(l), bx(r)),
                _ => CExpr::Int(*op, bx(l), bx(r), e.span),
            },
            ExprKind::In(l, s) => CExpr::In(bx(l), Box::new(self.set(s))),
            ExprKind::If(c, t, f) => CExpr::If(bx(c), bx(t), bx(f)),
        }
    }

    pub fn set(&self, s: &SetExpr) -> CSet {
        match s {
            SetExpr::Range(lo, hi) => CSet::Range(self.expr(lo), self.expr(hi), lo.span),
            SetExpr::Enum(items) => CSet::Enum(items.iter().map(|e| self.expr(e)).collect()),
        }
    }

    pub fn block(&mut self, stmts: &[Stmt]) -> Vec<CStmt> {
        stmts.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, s: &Stmt) -> CStmt {
        match &s.kind {
            StmtKind::Assign { var, value } => CStmt::Assign {
                var: self
                    .spec
                    .variable_index(var)
                    .expect("assignment targets are resolved by validation"),
                value: self.expr(value),
                span: s.span,
            },
            StmtKind::Any { binder, set, body } => {
                let set = self.set(set);
                let slot = self.binders.len();
                self.binders.push(binder.clone());
                let body = self.block(body);
                self.binders.pop();
                CStmt::Any { slot, set, body }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => CStmt::If {
                cond: self.expr(cond),
                then_branch: self.block(then_branch),
                else_branch: else_branch
                    .as_deref()
                    .map(|b| self.block(b))
                    .unwrap_or_default(),
            },
        }
    }
}
