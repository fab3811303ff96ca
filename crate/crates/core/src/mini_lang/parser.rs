// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the mini-language concrete syntax.
//!
//! ```text
//! program  := stmt*
//! stmt     := "skip" | "assume" "(" bexpr ")" | IDENT ":=" expr
//!           | IDENT "." ("insert" | "delete") "(" expr ")"
//!           | "read" "(" IDENT ")" | "write" "(" expr ")"
//!           | "if" "(" bexpr ")" block ("else" (block | if-stmt))?
//!           | "while" "(" bexpr ")" block
//! block    := "{" stmt* "}"
//! ```
//!
//! Statements may be separated by newlines or `;`. `//` starts a line comment.

use num_bigint::BigInt;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub const RESERVED: &[&str] = &["skip", "assume", "if", "else", "while", "read", "write", "true", "false"];

/// Statement list delimited by braces (or the whole file for the root).
#[derive(Clone, Debug)]
pub struct Block {
    pub span: Span,
    pub stmts: Vec<SyntaxStmt>,
}

#[derive(Clone, Debug)]
pub struct SyntaxStmt {
    pub span: Span,
    pub kind: SyntaxKind,
}

#[derive(Clone, Debug)]
pub enum SyntaxKind {
    /// A statement without sub-statements (skip, assume, assignment, read, write).
    Leaf(Stmt),
    If { cond: Cond, then_block: Block, else_part: Option<ElsePart> },
    While { cond: Cond, body: Block },
}

#[derive(Clone, Debug)]
pub enum ElsePart {
    Block(Block),
    If(Box<SyntaxStmt>),
}

/// Concrete syntax tree: blocks keep their brace ranges, comments are kept aside.
#[derive(Clone, Debug)]
pub struct SyntaxTree {
    pub root: Block,
    pub comments: Vec<Span>,
}

impl SyntaxTree {
    pub fn to_stmt(&self) -> Stmt {
        block_to_stmt(&self.root)
    }
}

fn block_to_stmt(block: &Block) -> Stmt {
    let stmts: Vec<Stmt> = block.stmts.iter().map(syntax_to_stmt).collect();
    if stmts.is_empty() {
        return Stmt::new(StmtKind::Skip, Span::new(block.span.start, block.span.start));
    }
    Stmt::seq(stmts)
}

fn syntax_to_stmt(s: &SyntaxStmt) -> Stmt {
    match &s.kind {
        SyntaxKind::Leaf(stmt) => stmt.clone(),
        SyntaxKind::If { cond, then_block, else_part } => {
            let else_branch = match else_part {
                None => Stmt::new(StmtKind::Skip, Span::new(s.span.end, s.span.end)),
                Some(ElsePart::Block(b)) => block_to_stmt(b),
                Some(ElsePart::If(inner)) => syntax_to_stmt(inner),
            };
            Stmt::new(
                StmtKind::If {
                    cond: cond.clone(),
                    then_branch: Box::new(block_to_stmt(then_block)),
                    else_branch: Box::new(else_branch),
                },
                s.span,
            )
        }
        SyntaxKind::While { cond, body } => {
            Stmt::new(StmtKind::While { cond: cond.clone(), body: Box::new(block_to_stmt(body)) }, s.span)
        }
    }
}

pub fn parse_syntax(src: &str) -> Result<SyntaxTree, ParseError> {
    let (tokens, comments) = tokenize(src)?;
    let mut p = Parser { src, tokens, pos: 0 };
    let stmts = p.stmt_list(false)?;
    if let Some(t) = p.peek() {
        return Err(p.error_at(t.span.start, "unexpected `}`"));
    }
    Ok(SyntaxTree { root: Block { span: Span::new(0, src.len()), stmts }, comments })
}

pub fn parse_stmt(src: &str) -> Result<Stmt, ParseError> {
    Ok(parse_syntax(src)?.to_stmt())
}

pub fn parse_bool_expr(src: &str) -> Result<BoolExpr, ParseError> {
    let (tokens, _) = tokenize(src)?;
    let mut p = Parser { src, tokens, pos: 0 };
    let e = p.bexpr()?;
    if let Some(t) = p.peek() {
        return Err(p.error_at(t.span.start, "trailing input after condition"));
    }
    Ok(e)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let (tokens, _) = tokenize(src)?;
    let mut p = Parser { src, tokens, pos: 0 };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(p.error_at(t.span.start, "trailing input after expression"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    fn error_at(&self, offset: usize, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.src, offset, msg)
    }

    fn eof_offset(&self) -> usize {
        self.src.len()
    }

    fn error_here(&self, msg: &str) -> ParseError {
        let off = self.peek().map(|t| t.span.start).unwrap_or_else(|| self.eof_offset());
        let found = match self.peek() {
            Some(t) => format!("`{}`", &self.src[t.span.start..t.span.end]),
            None => "end of input".to_string(),
        };
        self.error_at(off, format!("{msg}, found {found}"))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(q), .. }) if *q == p)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    fn expect_punct(&mut self, p: &str) -> Result<Span, ParseError> {
        if self.is_punct(p) {
            let span = self.tokens[self.pos].span;
            self.pos += 1;
            Ok(span)
        } else {
            Err(self.error_here(&format!("expected `{p}`")))
        }
    }

    fn variable(&mut self) -> Result<(VarName, Span), ParseError> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Ident(name), span }) => {
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.error_at(span.start, format!("reserved word `{name}` cannot be used as a variable")));
                }
                self.pos += 1;
                Ok((name, span))
            }
            _ => Err(self.error_here("expected a variable name")),
        }
    }

    fn stmt_list(&mut self, in_block: bool) -> Result<Vec<SyntaxStmt>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.is_punct(";") {
                self.pos += 1;
            }
            match self.peek() {
                None => {
                    if in_block {
                        return Err(self.error_here("expected `}`"));
                    }
                    return Ok(out);
                }
                Some(Token { tok: Tok::Punct("}"), .. }) => return Ok(out),
                _ => out.push(self.stmt()?),
            }
        }
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        let open = self.expect_punct("{")?;
        let stmts = self.stmt_list(true)?;
        let close = self.expect_punct("}")?;
        Ok(Block { span: Span::new(open.start, close.end), stmts })
    }

    fn paren_cond(&mut self) -> Result<Cond, ParseError> {
        let open = self.expect_punct("(")?;
        let first = self.peek().map(|t| t.span.start).unwrap_or(open.end);
        let expr = self.bexpr()?;
        let last = self.tokens[self.pos - 1].span.end;
        self.expect_punct(")")?;
        Ok(Cond { expr, span: Span::new(first, last) })
    }

    fn stmt(&mut self) -> Result<SyntaxStmt, ParseError> {
        let start_tok = self.peek().cloned().expect("stmt called at end of input");
        let start = start_tok.span.start;
        let word = match &start_tok.tok {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.error_here("expected a statement")),
        };
        let leaf = |kind: StmtKind, end: usize| SyntaxStmt {
            span: Span::new(start, end),
            kind: SyntaxKind::Leaf(Stmt::new(kind, Span::new(start, end))),
        };
        if RESERVED.contains(&word.as_str()) && matches!(self.tokens.get(self.pos + 1), Some(Token { tok: Tok::Punct(":=" | "="), .. })) {
            return Err(ParseError::at(self.src, start, format!("reserved word `{word}` cannot be used as a variable")));
        }
        match word.as_str() {
            "skip" => {
                self.pos += 1;
                Ok(leaf(StmtKind::Skip, start_tok.span.end))
            }
            "assume" => {
                self.pos += 1;
                let cond = self.paren_cond()?;
                let end = self.tokens[self.pos - 1].span.end;
                Ok(leaf(StmtKind::Assume(cond), end))
            }
            "read" => {
                self.pos += 1;
                self.expect_punct("(")?;
                let (v, _) = self.variable()?;
                let close = self.expect_punct(")")?;
                Ok(leaf(StmtKind::Read(v), close.end))
            }
            "write" => {
                self.pos += 1;
                self.expect_punct("(")?;
                let e = self.expr()?;
                let close = self.expect_punct(")")?;
                Ok(leaf(StmtKind::Write(e), close.end))
            }
            "if" => {
                self.pos += 1;
                let cond = self.paren_cond()?;
                let then_block = self.block()?;
                let mut end = then_block.span.end;
                let else_part = if self.is_keyword("else") {
                    self.pos += 1;
                    if self.is_keyword("if") {
                        let inner = self.stmt()?;
                        end = inner.span.end;
                        Some(ElsePart::If(Box::new(inner)))
                    } else {
                        let b = self.block()?;
                        end = b.span.end;
                        Some(ElsePart::Block(b))
                    }
                } else {
                    None
                };
                Ok(SyntaxStmt { span: Span::new(start, end), kind: SyntaxKind::If { cond, then_block, else_part } })
            }
            "while" => {
                self.pos += 1;
                let cond = self.paren_cond()?;
                let body = self.block()?;
                Ok(SyntaxStmt { span: Span::new(start, body.span.end), kind: SyntaxKind::While { cond, body } })
            }
            "else" => Err(self.error_at(start, "`else` without a matching `if`")),
            _ => {
                let (target, _) = self.variable()?;
                if self.is_punct(".") {
                    self.pos += 1;
                    let method = match self.peek().cloned() {
                        Some(Token { tok: Tok::Ident(m), .. }) if m == "insert" || m == "delete" => m,
                        _ => return Err(self.error_here("expected `insert` or `delete`")),
                    };
                    self.pos += 1;
                    self.expect_punct("(")?;
                    let arg = self.expr()?;
                    let close = self.expect_punct(")")?;
                    let value = if method == "insert" {
                        Expr::Insert(target.clone(), Box::new(arg))
                    } else {
                        Expr::Delete(target.clone(), Box::new(arg))
                    };
                    return Ok(leaf(StmtKind::Assign { target, value }, close.end));
                }
                self.expect_punct(":=")?;
                let value = self.expr()?;
                let end = self.tokens[self.pos - 1].span.end;
                Ok(leaf(StmtKind::Assign { target, value }, end))
            }
        }
    }

    fn bexpr(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.band()?;
        while self.is_punct("||") {
            self.pos += 1;
            let rhs = self.band()?;
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn band(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.bnot()?;
        while self.is_punct("&&") {
            self.pos += 1;
            let rhs = self.bnot()?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bnot(&mut self) -> Result<BoolExpr, ParseError> {
        if self.is_punct("!") {
            self.pos += 1;
            return Ok(BoolExpr::Not(Box::new(self.bnot()?)));
        }
        self.batom()
    }

    fn batom(&mut self) -> Result<BoolExpr, ParseError> {
        if self.is_keyword("true") {
            self.pos += 1;
            return Ok(BoolExpr::True);
        }
        if self.is_keyword("false") {
            self.pos += 1;
            return Ok(BoolExpr::False);
        }
        if self.is_punct("(") {
            // Either a parenthesized condition or an arithmetic operand of a comparison.
            let save = self.pos;
            self.pos += 1;
            if let Ok(inner) = self.bexpr() {
                if self.is_punct(")") {
                    self.pos += 1;
                    if !self.at_expr_continuation() {
                        return Ok(inner);
                    }
                }
            }
            self.pos = save;
        }
        // Literal `0`/`1` stand for false/true when not compared (`assume(0)`).
        if let (Some(Tok::Int(n)), next) = (self.peek_at(0).cloned(), self.peek_at(1).cloned()) {
            let standalone = !matches!(next, Some(Tok::Punct(p)) if is_cmp(p) || is_arith(p));
            if standalone && (n == "0" || n == "1") {
                self.pos += 1;
                return Ok(if n == "0" { BoolExpr::False } else { BoolExpr::True });
            }
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Token { tok: Tok::Punct(p), .. }) => match *p {
                "<" => CmpOp::Lt,
                "<=" => CmpOp::Le,
                ">" => CmpOp::Gt,
                ">=" => CmpOp::Ge,
                "==" | "=" => CmpOp::Eq,
                "!=" => CmpOp::Ne,
                _ => return Err(self.error_here("expected a comparison operator")),
            },
            _ => return Err(self.error_here("expected a comparison operator")),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(BoolExpr::Cmp(op, lhs, rhs))
    }

    fn at_expr_continuation(&self) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if is_cmp(p) || is_arith(p))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.is_punct("+") {
                self.pos += 1;
                let rhs = self.term()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.is_punct("-") {
                self.pos += 1;
                let rhs = self.term()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.is_punct("*") {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_punct("-") {
            self.pos += 1;
            // `-3` is a literal; `-(3)` stays a negation.
            if let Some(Token { tok: Tok::Int(n), .. }) = self.peek().cloned() {
                self.pos += 1;
                return Ok(Expr::Int(-n.parse::<BigInt>().expect("lexer only yields digits")));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Int(n), .. }) => {
                self.pos += 1;
                Ok(Expr::Int(n.parse::<BigInt>().expect("lexer only yields digits")))
            }
            Some(Token { tok: Tok::Punct("("), .. }) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Some(Token { tok: Tok::Punct("["), .. }) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.is_punct("]") {
                    loop {
                        items.push(self.expr()?);
                        if self.is_punct(",") {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect_punct("]")?;
                Ok(Expr::SeqLit(items))
            }
            Some(Token { tok: Tok::Ident(_), .. }) => {
                let (v, _) = self.variable()?;
                if !self.is_punct(".") {
                    return Ok(Expr::Var(v));
                }
                self.pos += 1;
                let method = match self.peek().cloned() {
                    Some(Token { tok: Tok::Ident(m), .. }) => m,
                    _ => return Err(self.error_here("expected a method name")),
                };
                self.pos += 1;
                self.expect_punct("(")?;
                let e = match method.as_str() {
                    "size" => Expr::Size(v),
                    "insert" => Expr::Insert(v, Box::new(self.expr()?)),
                    "delete" => Expr::Delete(v, Box::new(self.expr()?)),
                    other => {
                        let off = self.tokens[self.pos - 2].span.start;
                        return Err(self.error_at(off, format!("unknown sequence method `{other}`")));
                    }
                };
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.error_here("expected an expression")),
        }
    }
}

fn is_cmp(p: &str) -> bool {
    matches!(p, "<" | "<=" | ">" | ">=" | "==" | "=" | "!=")
}

fn is_arith(p: &str) -> bool {
    matches!(p, "+" | "-" | "*")
}
