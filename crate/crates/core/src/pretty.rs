//! Canonical text rendering of a [`SpecModel`]; the output reparses to an equal model.

use std::fmt::Write;

use crate::model::{
    Expr, ExprKind, InitClause, SetExpr, Shape, SpecModel, Stmt, StmtKind, TemporalProperty,
};

const NOT_PREC: u8 = 4;
const CMP_PREC: u8 = 5;
const ADD_PREC: u8 = 6;
const ATOM_PREC: u8 = 8;

pub fn pretty_print(spec: &SpecModel) -> String {
    let mut out = String::new();
    writeln!(out, "spec {}", spec.name).unwrap();
    if !spec.constants.is_empty() {
        out.push('\n');
        for c in &spec.constants {
            writeln!(out, "const {} : {}", c.name, c.kind).unwrap();
        }
    }
    if !spec.variables.is_empty() {
        out.push('\n');
    }
    for v in &spec.variables {
        write!(out, "var {} : {}", v.name, v.kind).unwrap();
        if let Some(domain) = &v.domain {
            write!(out, " domain {}", set_to_string(domain)).unwrap();
        }
        match &v.init {
            InitClause::Value(e) => writeln!(out, " init {}", expr_to_string(e)).unwrap(),
            InitClause::In(s) => writeln!(out, " init in {}", set_to_string(s)).unwrap(),
        }
    }
    for a in &spec.actions {
        out.push('\n');
        writeln!(out, "action {} {{", a.name).unwrap();
        for g in &a.guards {
            writeln!(out, "  when {}", expr_to_string(g)).unwrap();
        }
        write_block(&mut out, &a.body, 1);
        out.push_str("}\n");
    }
    if !spec.properties.is_empty() {
        out.push('\n');
    }
    for p in &spec.properties {
        out.push_str(&property_to_string(p));
        out.push('\n');
    }
    out
}

pub fn property_to_string(p: &TemporalProperty) -> String {
    let body = match (&p.shape, &p.binder) {
        (Shape::Invariant(e), None) => {
            return format!("invariant {}: {}", p.name, expr_to_string(e))
        }
        (Shape::Invariant(e), Some(_)) => format!("always ({})", expr_to_string(e)),
        (Shape::Eventually(e), _) => format!("eventually ({})", expr_to_string(e)),
        (Shape::AlwaysEventually(e), _) => format!("always eventually ({})", expr_to_string(e)),
        (Shape::LeadsTo(l, r), _) => {
            format!("({}) leadsto ({})", expr_to_string(l), expr_to_string(r))
        }
    };
    match &p.binder {
        Some(b) => format!(
            "property {}: forall {} in {} : {}",
            p.name,
            b.var,
            set_to_string(&b.set),
            body
        ),
        None => format!("property {}: {}", p.name, body),
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    let pad = "  ".repeat(depth);
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { var, value } => {
                writeln!(out, "{pad}{var}' = {}", expr_to_string(value)).unwrap();
            }
            StmtKind::Any { binder, set, body } => {
                writeln!(out, "{pad}any {binder} in {} {{", set_to_string(set)).unwrap();
                write_block(out, body, depth + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                writeln!(out, "{pad}if {} {{", expr_to_string(cond)).unwrap();
                write_block(out, then_branch, depth + 1);
                match else_branch {
                    Some(els) => {
                        writeln!(out, "{pad}}} else {{").unwrap();
                        write_block(out, els, depth + 1);
                        writeln!(out, "{pad}}}").unwrap();
                    }
                    None => writeln!(out, "{pad}}}").unwrap(),
                }
            }
        }
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

pub fn set_to_string(s: &SetExpr) -> String {
    let mut out = String::new();
    write_set(&mut out, s);
    out
}

fn write_set(out: &mut String, s: &SetExpr) {
    match s {
        SetExpr::Range(lo, hi) => {
            write_expr(out, lo, ADD_PREC);
            out.push_str("..");
            write_expr(out, hi, ADD_PREC);
        }
        SetExpr::Enum(items) => {
            out.push('{');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item, 0);
            }
            out.push('}');
        }
    }
}

type Render<'a> = Box<dyn Fn(&mut String) + 'a>;

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let (prec, render): (u8, Render) = match &e.kind {
        ExprKind::Lit(v) => (ATOM_PREC, Box::new(move |o| write!(o, "{v}").unwrap())),
        ExprKind::Ident(name) => (ATOM_PREC, Box::new(move |o| o.push_str(name))),
        ExprKind::Not(inner) => (
            NOT_PREC,
            Box::new(move |o| {
                o.push_str("not ");
                write_expr(o, inner, NOT_PREC);
            }),
        ),
        ExprKind::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            let (lmin, rmin) = if op.is_comparison() {
                (p + 1, p + 1)
            } else if *op == crate::model::BinOp::Implies {
                (p + 1, p)
            } else {
                (p, p + 1)
            };
            (
                p,
                Box::new(move |o| {
                    write_expr(o, lhs, lmin);
                    write!(o, " {} ", op.symbol()).unwrap();
                    write_expr(o, rhs, rmin);
                }),
            )
        }
        ExprKind::In(lhs, set) => (
            CMP_PREC,
            Box::new(move |o| {
                write_expr(o, lhs, CMP_PREC + 1);
                o.push_str(" in ");
                write_set(o, set);
            }),
        ),
        // The else branch extends as far right as possible, so a conditional is
        // parenthesized everywhere except in a full-expression position.
        ExprKind::If(c, t, f) => (
            0,
            Box::new(move |o| {
                o.push_str("if ");
                write_expr(o, c, 0);
                o.push_str(" then ");
                write_expr(o, t, 0);
                o.push_str(" else ");
                write_expr(o, f, 0);
            }),
        ),
    };
    if prec < min_prec || (min_prec > 0 && prec == 0) {
        out.push('(');
        render(out);
        out.push(')');
    } else {
        render(out);
    }
}
