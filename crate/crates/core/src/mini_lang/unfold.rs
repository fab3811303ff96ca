// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Bounded path enumeration: every straight-line program obtained by
//! resolving each `if` to one branch (as an `assume`) and unrolling each
//! `while` at most `bound` times per entry.

use super::ast::*;
use super::printer::print_path;

/// A straight-line program: a list of leaf statements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearPath {
    pub stmts: Vec<Stmt>,
}

impl LinearPath {
    pub fn is_linear(&self) -> bool {
        self.stmts.iter().all(|s| s.is_linear_leaf())
    }

    pub fn to_stmt(&self) -> Stmt {
        Stmt::seq(self.stmts.clone())
    }

    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    pub fn text(&self) -> String {
        print_path(&self.stmts)
    }
}

#[derive(Clone, Debug)]
pub struct Unfolding {
    pub paths: Vec<LinearPath>,
    /// The program contains a loop, so longer executions were cut off.
    pub truncated: bool,
}

fn assume(cond: &Cond, positive: bool) -> Stmt {
    let expr = if positive { cond.expr.clone() } else { cond.expr.negate() };
    Stmt::new(StmtKind::Assume(Cond { expr, span: cond.span }), cond.span)
}

/// Paths are in DFS order (true branch and "iterate again" first) and
/// deduplicated, keeping the first occurrence.
pub fn unfold_bounded(prog: &Stmt, bound: usize) -> Unfolding {
    let mut truncated = false;
    let raw = unfold(prog, bound, &mut truncated);
    let mut seen = std::collections::HashSet::new();
    let mut paths = Vec::new();
    for stmts in raw {
        let key: Vec<Stmt> = stmts.iter().map(Stmt::without_spans).collect();
        if seen.insert(key) {
            paths.push(LinearPath { stmts });
        }
    }
    Unfolding { paths, truncated }
}

fn product(prefixes: Vec<Vec<Stmt>>, suffixes: &[Vec<Stmt>]) -> Vec<Vec<Stmt>> {
    let mut out = Vec::with_capacity(prefixes.len() * suffixes.len());
    for p in &prefixes {
        for s in suffixes {
            let mut v = p.clone();
            v.extend(s.iter().cloned());
            out.push(v);
        }
    }
    out
}

fn unfold(s: &Stmt, bound: usize, truncated: &mut bool) -> Vec<Vec<Stmt>> {
    match &s.kind {
        StmtKind::Skip => vec![vec![]],
        StmtKind::Seq(a, b) => {
            let left = unfold(a, bound, truncated);
            let right = unfold(b, bound, truncated);
            product(left, &right)
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            let mut out = product(vec![vec![assume(cond, true)]], &unfold(then_branch, bound, truncated));
            out.extend(product(vec![vec![assume(cond, false)]], &unfold(else_branch, bound, truncated)));
            out
        }
        StmtKind::While { cond, body } => {
            let body_paths = unfold(body, bound, truncated);
            *truncated = true;
            unroll(cond, &body_paths, bound)
        }
        _ => vec![vec![s.clone()]],
    }
}

/// Paths for `while` with at most `remaining` more iterations.
fn unroll(cond: &Cond, body_paths: &[Vec<Stmt>], remaining: usize) -> Vec<Vec<Stmt>> {
    let mut out = Vec::new();
    if remaining > 0 {
        let iter = product(vec![vec![assume(cond, true)]], body_paths);
        out.extend(product(iter, &unroll(cond, body_paths, remaining - 1)));
    }
    out.push(vec![assume(cond, false)]);
    out
}
