// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub type VarName = String;

/// Half-open byte range into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn join(&self, other: &Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(BigInt),
    Var(VarName),
    /// `[e1, e2, ...]`
    SeqLit(Vec<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `v.insert(e)`: the sequence in `v` with `e` appended.
    Insert(VarName, Box<Expr>),
    /// `v.delete(e)`: the sequence in `v` with the first occurrence of `e` removed.
    Delete(VarName, Box<Expr>),
    /// `v.size()`
    Size(VarName),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn negate(&self) -> BoolExpr {
        BoolExpr::Not(Box::new(self.clone()))
    }
}

/// A condition together with the byte range of its text (inside the parentheses).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cond {
    pub expr: BoolExpr,
    pub span: Span,
}

impl Cond {
    pub fn synthetic(expr: BoolExpr) -> Self {
        Cond { expr, span: Span::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Skip,
    Seq(Box<Stmt>, Box<Stmt>),
    Assume(Cond),
    Assign { target: VarName, value: Expr },
    If { cond: Cond, then_branch: Box<Stmt>, else_branch: Box<Stmt> },
    While { cond: Cond, body: Box<Stmt> },
    Read(VarName),
    Write(Expr),
}

impl Stmt {
    pub fn new(kind: StmtKind, span: Span) -> Self {
        Stmt { kind, span }
    }

    pub fn synthetic(kind: StmtKind) -> Self {
        Stmt { kind, span: Span::default() }
    }

    pub fn skip() -> Self {
        Stmt::synthetic(StmtKind::Skip)
    }

    /// Right-nested sequence of `stmts`; an empty list is `skip`.
    pub fn seq(mut stmts: Vec<Stmt>) -> Stmt {
        match stmts.len() {
            0 => Stmt::skip(),
            1 => stmts.pop().unwrap(),
            _ => {
                let first = stmts.remove(0);
                let rest = Stmt::seq(stmts);
                let span = if first.span == Span::default() || rest.span == Span::default() {
                    Span::default()
                } else {
                    first.span.join(&rest.span)
                };
                Stmt::new(StmtKind::Seq(Box::new(first), Box::new(rest)), span)
            }
        }
    }

    /// Flattens nested `Seq` nodes into the list of their components.
    pub fn flatten(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        fn go<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
            match &s.kind {
                StmtKind::Seq(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => out.push(s),
            }
        }
        go(self, &mut out);
        out
    }

    /// Copy of this tree with every span (statement and condition) reset.
    pub fn without_spans(&self) -> Stmt {
        let kind = match &self.kind {
            StmtKind::Skip => StmtKind::Skip,
            StmtKind::Seq(a, b) => StmtKind::Seq(Box::new(a.without_spans()), Box::new(b.without_spans())),
            StmtKind::Assume(c) => StmtKind::Assume(Cond::synthetic(c.expr.clone())),
            StmtKind::Assign { target, value } => StmtKind::Assign { target: target.clone(), value: value.clone() },
            StmtKind::If { cond, then_branch, else_branch } => StmtKind::If {
                cond: Cond::synthetic(cond.expr.clone()),
                then_branch: Box::new(then_branch.without_spans()),
                else_branch: Box::new(else_branch.without_spans()),
            },
            StmtKind::While { cond, body } => StmtKind::While {
                cond: Cond::synthetic(cond.expr.clone()),
                body: Box::new(body.without_spans()),
            },
            StmtKind::Read(v) => StmtKind::Read(v.clone()),
            StmtKind::Write(e) => StmtKind::Write(e.clone()),
        };
        Stmt::synthetic(kind)
    }

    /// Canonical sequence shape: nested `Seq` re-associated to the right and
    /// spans dropped. Two programs that differ only in how their statement
    /// lists were grouped compare equal after this.
    pub fn normalized(&self) -> Stmt {
        let parts: Vec<Stmt> = self
            .flatten()
            .into_iter()
            .map(|s| {
                let kind = match &s.kind {
                    StmtKind::If { cond, then_branch, else_branch } => StmtKind::If {
                        cond: Cond::synthetic(cond.expr.clone()),
                        then_branch: Box::new(then_branch.normalized()),
                        else_branch: Box::new(else_branch.normalized()),
                    },
                    StmtKind::While { cond, body } => StmtKind::While {
                        cond: Cond::synthetic(cond.expr.clone()),
                        body: Box::new(body.normalized()),
                    },
                    _ => s.without_spans().kind,
                };
                Stmt::synthetic(kind)
            })
            .collect();
        let mut seq = Stmt::seq(parts);
        seq.span = Span::default();
        seq
    }

    pub fn is_linear_leaf(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::Skip | StmtKind::Assume(_) | StmtKind::Assign { .. } | StmtKind::Read(_) | StmtKind::Write(_)
        )
    }
}

/// Variables read and written by a single leaf statement or condition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Access {
    pub reads: BTreeSet<VarName>,
    pub writes: BTreeSet<VarName>,
}

impl Expr {
    pub fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) | Expr::Size(v) => {
                out.insert(v.clone());
            }
            Expr::SeqLit(items) => items.iter().for_each(|e| e.collect_vars(out)),
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Insert(v, e) | Expr::Delete(v, e) => {
                out.insert(v.clone());
                e.collect_vars(out);
            }
        }
    }
}

impl BoolExpr {
    pub fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BoolExpr::Not(b) => b.collect_vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

impl Stmt {
    /// Exact read/write sets of a leaf statement. Compound statements report
    /// the access of their own condition only.
    pub fn access(&self) -> Access {
        let mut acc = Access::default();
        match &self.kind {
            StmtKind::Skip | StmtKind::Seq(..) => {}
            StmtKind::Assume(c) | StmtKind::If { cond: c, .. } | StmtKind::While { cond: c, .. } => {
                c.expr.collect_vars(&mut acc.reads)
            }
            StmtKind::Assign { target, value } => {
                value.collect_vars(&mut acc.reads);
                acc.writes.insert(target.clone());
            }
            StmtKind::Read(v) => {
                acc.writes.insert(v.clone());
            }
            StmtKind::Write(e) => e.collect_vars(&mut acc.reads),
        }
        acc
    }

    /// Every variable mentioned anywhere in the program.
    pub fn all_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        fn go(s: &Stmt, out: &mut BTreeSet<VarName>) {
            let acc = s.access();
            out.extend(acc.reads);
            out.extend(acc.writes);
            match &s.kind {
                StmtKind::Seq(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                StmtKind::If { then_branch, else_branch, .. } => {
                    go(then_branch, out);
                    go(else_branch, out);
                }
                StmtKind::While { body, .. } => go(body, out),
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}
