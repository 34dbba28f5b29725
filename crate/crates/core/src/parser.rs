//! Recursive-descent parser for `.spa` workflow specifications.

use thiserror::Error;

use crate::lexer::{tokenize, Keyword, Token, TokenKind};
use crate::model::{
    ActionDef, BinOp, Binder, ConstDecl, Expr, ExprKind, InitClause, SetExpr, Shape, Span,
    SpecModel, Stmt, StmtKind, TemporalProperty, VarDecl,
};
use crate::value::{Kind, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: u32,
    pub column: u32,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(message: impl Into<String>, line: u32, column: u32) -> Self {
        ParseError {
            message: message.into(),
            line,
            column,
            expected: Vec::new(),
        }
    }
}

pub fn parse_spec(source: &str) -> Result<SpecModel, ParseError> {
    let mut parser = Parser::new(source)?;
    let spec = parser.spec()?;
    parser.expect_eof()?;
    Ok(spec)
}

/// Parses a standalone state expression, e.g. a predicate given on the command line.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser::new(source)?;
    let expr = parser.expr()?;
    parser.expect_eof()?;
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(source)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.peek().kind
    }

    fn peek_nth(&self, n: usize) -> &TokenKind {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn span(&self) -> Span {
        let t = self.peek();
        Span::new(t.line, t.column)
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error_expected(&self, what: &[&str]) -> ParseError {
        let tok = self.peek();
        let listed = what.join(" or ");
        ParseError {
            message: format!("expected {listed}, found {}", tok.kind),
            line: tok.line,
            column: tok.column,
            expected: what.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn at_keyword(&self, kw: Keyword) -> bool {
        *self.peek_kind() == TokenKind::Keyword(kw)
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error_expected(&[&format!("`{}`", kw.as_str())]))
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error_expected(&[&kind.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek_kind() {
            TokenKind::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(name)
            }
            _ => Err(self.error_expected(&["identifier"])),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek_kind() == TokenKind::Eof {
            Ok(())
        } else {
            Err(self.error_expected(&["end of input"]))
        }
    }

    fn spec(&mut self) -> Result<SpecModel, ParseError> {
        self.expect_keyword(Keyword::Spec)?;
        let mut spec = SpecModel {
            name: self.ident()?,
            constants: Vec::new(),
            variables: Vec::new(),
            actions: Vec::new(),
            properties: Vec::new(),
        };
        loop {
            let span = self.span();
            match self.peek_kind() {
                TokenKind::Eof => break,
                TokenKind::Keyword(Keyword::Const) => {
                    self.advance();
                    let name = self.ident()?;
                    self.expect(TokenKind::Colon)?;
                    let kind = self.kind()?;
                    spec.constants.push(ConstDecl { name, kind, span });
                }
                TokenKind::Keyword(Keyword::Var) => spec.variables.push(self.var_decl()?),
                TokenKind::Keyword(Keyword::Action) => spec.actions.push(self.action()?),
                TokenKind::Keyword(Keyword::Invariant) => {
                    self.advance();
                    let name = self.ident()?;
                    self.expect(TokenKind::Colon)?;
                    let pred = self.expr()?;
                    spec.properties.push(TemporalProperty {
                        name,
                        binder: None,
                        shape: Shape::Invariant(pred),
                        span,
                    });
                }
                TokenKind::Keyword(Keyword::Property) => spec.properties.push(self.property()?),
                _ => {
                    return Err(self.error_expected(&[
                        "`const`",
                        "`var`",
                        "`action`",
                        "`invariant`",
                        "`property`",
                    ]))
                }
            }
        }
        Ok(spec)
    }

    fn kind(&mut self) -> Result<Kind, ParseError> {
        let kind = match self.peek_kind() {
            TokenKind::Keyword(Keyword::Int) => Kind::Int,
            TokenKind::Keyword(Keyword::Bool) => Kind::Bool,
            TokenKind::Keyword(Keyword::String) => Kind::Str,
            _ => return Err(self.error_expected(&["`int`", "`bool`", "`string`"])),
        };
        self.advance();
        Ok(kind)
    }

    fn var_decl(&mut self) -> Result<VarDecl, ParseError> {
        let span = self.span();
        self.expect_keyword(Keyword::Var)?;
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let kind = self.kind()?;
        let domain = if self.eat_keyword(Keyword::Domain) {
            Some(self.set_expr()?)
        } else {
            None
        };
        self.expect_keyword(Keyword::Init)?;
        let init = if self.eat_keyword(Keyword::In) {
            InitClause::In(self.set_expr()?)
        } else {
            InitClause::Value(self.expr()?)
        };
        Ok(VarDecl {
            name,
            kind,
            domain,
            init,
            span,
        })
    }

    fn action(&mut self) -> Result<ActionDef, ParseError> {
        let span = self.span();
        self.expect_keyword(Keyword::Action)?;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut guards = Vec::new();
        let mut body = Vec::new();
        while !self.eat(&TokenKind::RBrace) {
            if self.eat_keyword(Keyword::When) {
                guards.push(self.expr()?);
            } else {
                body.push(self.stmt()?);
            }
        }
        Ok(ActionDef {
            name,
            guards,
            body,
            span,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(TokenKind::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&TokenKind::RBrace) {
            if self.at_keyword(Keyword::When) {
                let span = self.span();
                return Err(ParseError::new(
                    "`when` is only allowed at the top level of an action",
                    span.line,
                    span.column,
                ));
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let kind = match self.peek_kind() {
            TokenKind::Ident(_) => {
                let var = self.ident()?;
                self.expect(TokenKind::Prime)?;
                self.expect(TokenKind::Eq)?;
                let value = self.expr()?;
                StmtKind::Assign { var, value }
            }
            TokenKind::Keyword(Keyword::Any) => {
                self.advance();
                let binder = self.ident()?;
                self.expect_keyword(Keyword::In)?;
                let set = self.set_expr()?;
                let body = self.block()?;
                StmtKind::Any { binder, set, body }
            }
            TokenKind::Keyword(Keyword::If) => {
                self.advance();
                let cond = self.expr()?;
                let then_branch = self.block()?;
                let else_branch = if self.eat_keyword(Keyword::Else) {
                    Some(self.block()?)
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            _ => {
                return Err(self.error_expected(&[
                    "`when`",
                    "primed assignment",
                    "`any`",
                    "`if`",
                    "`}`",
                ]))
            }
        };
        Ok(Stmt { kind, span })
    }

    fn property(&mut self) -> Result<TemporalProperty, ParseError> {
        let span = self.span();
        self.expect_keyword(Keyword::Property)?;
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let binder = if self.eat_keyword(Keyword::Forall) {
            let var = self.ident()?;
            self.expect_keyword(Keyword::In)?;
            let set = self.set_expr()?;
            self.expect(TokenKind::Colon)?;
            Some(Binder { var, set })
        } else {
            None
        };
        let shape = self.temporal_form()?;
        Ok(TemporalProperty {
            name,
            binder,
            shape,
            span,
        })
    }

    fn parenthesized(&mut self) -> Result<Expr, ParseError> {
        self.expect(TokenKind::LParen)?;
        let e = self.expr()?;
        self.expect(TokenKind::RParen)?;
        Ok(e)
    }

    fn temporal_form(&mut self) -> Result<Shape, ParseError> {
        match self.peek_kind() {
            TokenKind::Keyword(Keyword::Always) => {
                self.advance();
                if self.eat_keyword(Keyword::Eventually) {
                    Ok(Shape::AlwaysEventually(self.parenthesized()?))
                } else {
                    Ok(Shape::Invariant(self.parenthesized()?))
                }
            }
            TokenKind::Keyword(Keyword::Eventually) => {
                self.advance();
                Ok(Shape::Eventually(self.parenthesized()?))
            }
            TokenKind::LParen => {
                let p = self.parenthesized()?;
                self.expect_keyword(Keyword::Leadsto)?;
                let q = self.parenthesized()?;
                Ok(Shape::LeadsTo(p, q))
            }
            TokenKind::Ident(_) => {
                let p_span = self.span();
                let p = self.ident()?;
                self.expect_keyword(Keyword::Leadsto)?;
                let q_span = self.span();
                let q = self.ident()?;
                Ok(Shape::LeadsTo(
                    Expr::new(ExprKind::Ident(p), p_span),
                    Expr::new(ExprKind::Ident(q), q_span),
                ))
            }
            _ => Err(self.error_expected(&["`always`", "`eventually`", "`(`", "identifier"])),
        }
    }

    fn set_expr(&mut self) -> Result<SetExpr, ParseError> {
        if self.eat(&TokenKind::LBrace) {
            let mut items = vec![self.expr()?];
            while self.eat(&TokenKind::Comma) {
                items.push(self.expr()?);
            }
            self.expect(TokenKind::RBrace)?;
            Ok(SetExpr::Enum(items))
        } else {
            let lo = self.additive()?;
            self.expect(TokenKind::DotDot)?;
            let hi = self.additive()?;
            Ok(SetExpr::Range(lo, hi))
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat_keyword(Keyword::Implies) {
            let rhs = self.expr()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat_keyword(Keyword::Or) {
            let rhs = self.conjunction()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat_keyword(Keyword::And) {
            let rhs = self.negation()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        if self.eat_keyword(Keyword::Not) {
            let inner = self.negation()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(inner)), span));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek_kind() {
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Keyword(Keyword::In) => {
                self.advance();
                let set = self.set_expr()?;
                let span = lhs.span;
                return Ok(Expr::new(ExprKind::In(Box::new(lhs), Box::new(set)), span));
            }
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.additive()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.primary()?;
        while self.eat(&TokenKind::Star) {
            let rhs = self.primary()?;
            lhs = Expr::binary(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let kind = match self.peek_kind().clone() {
            TokenKind::Int(i) => {
                self.advance();
                ExprKind::Lit(Value::Int(i))
            }
            TokenKind::Str(s) => {
                self.advance();
                ExprKind::Lit(Value::str(&s))
            }
            TokenKind::Keyword(Keyword::True) => {
                self.advance();
                ExprKind::Lit(Value::Bool(true))
            }
            TokenKind::Keyword(Keyword::False) => {
                self.advance();
                ExprKind::Lit(Value::Bool(false))
            }
            TokenKind::Ident(name) => {
                if *self.peek_nth(1) == TokenKind::Prime {
                    return Err(ParseError::new(
                        format!(
                            "primed variable `{name}'` may only appear on the left-hand side of an assignment"
                        ),
                        span.line,
                        span.column,
                    ));
                }
                self.advance();
                ExprKind::Ident(name)
            }
            TokenKind::LParen => return self.parenthesized(),
            TokenKind::Keyword(Keyword::If) => {
                self.advance();
                let cond = self.expr()?;
                self.expect_keyword(Keyword::Then)?;
                let then_e = self.expr()?;
                self.expect_keyword(Keyword::Else)?;
                let else_e = self.expr()?;
                ExprKind::If(Box::new(cond), Box::new(then_e), Box::new(else_e))
            }
            _ => return Err(self.error_expected(&["expression"])),
        };
        Ok(Expr::new(kind, span))
    }
}
