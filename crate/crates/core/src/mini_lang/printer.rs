// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Canonical pretty-printer: two-space indentation, LF line endings, single
//! spaces around binary operators.

use std::fmt::Write;

use super::ast::*;

pub fn print_stmt(stmt: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(stmt, 0, &mut out);
    out
}

pub fn print_path(stmts: &[Stmt]) -> String {
    let mut out = String::new();
    for s in stmts {
        write_stmt(s, 0, &mut out);
    }
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_stmt(stmt: &Stmt, level: usize, out: &mut String) {
    match &stmt.kind {
        StmtKind::Seq(a, b) => {
            write_stmt(a, level, out);
            write_stmt(b, level, out);
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            indent(level, out);
            let _ = writeln!(out, "if ({}) {{", print_bool(&cond.expr));
            write_stmt(then_branch, level + 1, out);
            indent(level, out);
            out.push_str("} else {\n");
            write_stmt(else_branch, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        StmtKind::While { cond, body } => {
            indent(level, out);
            let _ = writeln!(out, "while ({}) {{", print_bool(&cond.expr));
            write_stmt(body, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        _ => {
            indent(level, out);
            out.push_str(&print_leaf(stmt));
            out.push('\n');
        }
    }
}

/// Single-line form of a leaf statement.
pub fn print_leaf(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Skip => "skip".to_string(),
        StmtKind::Assume(c) => format!("assume({})", print_bool(&c.expr)),
        StmtKind::Assign { target, value } => match value {
            Expr::Insert(v, e) if v == target => format!("{target}.insert({})", print_expr(e)),
            Expr::Delete(v, e) if v == target => format!("{target}.delete({})", print_expr(e)),
            _ => format!("{target} := {}", print_expr(value)),
        },
        StmtKind::Read(v) => format!("read({v})"),
        StmtKind::Write(e) => format!("write({})", print_expr(e)),
        StmtKind::Seq(..) | StmtKind::If { .. } | StmtKind::While { .. } => print_stmt(stmt),
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(_) => 3,
        _ => 4,
    }
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Var(v) => v.clone(),
        Expr::SeqLit(items) => {
            let parts: Vec<String> = items.iter().map(print_expr).collect();
            format!("[{}]", parts.join(", "))
        }
        Expr::Neg(inner) => {
            // `- -x` would lex fine, but `-(-x)` reads better and `--` never appears.
            if prec(inner) < 3 || matches!(**inner, Expr::Neg(_)) || matches!(**inner, Expr::Int(_)) {
                format!("-({})", print_expr(inner))
            } else {
                format!("-{}", print_expr(inner))
            }
        }
        Expr::Add(a, b) => format!("{} + {}", operand(a, 1, false), operand(b, 1, true)),
        Expr::Sub(a, b) => format!("{} - {}", operand(a, 1, false), operand(b, 1, true)),
        Expr::Mul(a, b) => format!("{} * {}", operand(a, 2, false), operand(b, 2, true)),
        Expr::Insert(v, e) => format!("{v}.insert({})", print_expr(e)),
        Expr::Delete(v, e) => format!("{v}.delete({})", print_expr(e)),
        Expr::Size(v) => format!("{v}.size()"),
    }
}

fn operand(e: &Expr, parent: u8, right: bool) -> String {
    let p = prec(e);
    if p < parent || (right && p == parent) {
        format!("({})", print_expr(e))
    } else {
        print_expr(e)
    }
}

fn bprec(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        BoolExpr::Not(_) => 3,
        _ => 4,
    }
}

pub fn print_bool(b: &BoolExpr) -> String {
    match b {
        BoolExpr::True => "true".to_string(),
        BoolExpr::False => "false".to_string(),
        BoolExpr::Cmp(op, l, r) => format!("{} {} {}", print_expr(l), op.symbol(), print_expr(r)),
        BoolExpr::Not(inner) => format!("!({})", print_bool(inner)),
        BoolExpr::And(a, c) => format!("{} && {}", boperand(a, 2, false), boperand(c, 2, true)),
        BoolExpr::Or(a, c) => format!("{} || {}", boperand(a, 1, false), boperand(c, 1, true)),
    }
}

fn boperand(b: &BoolExpr, parent: u8, right: bool) -> String {
    let p = bprec(b);
    if p < parent || (right && p == parent) {
        format!("({})", print_bool(b))
    } else {
        print_bool(b)
    }
}
