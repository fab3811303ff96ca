// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Mini-language view of a slice, used to execute truncations and slices.

use std::collections::HashMap;

use super::{SliceProgram, TNode};
use crate::cfg::{Cfg, NodeId};
use crate::mini_lang::{parse_mini, BoolExpr, Cond, ParseError, Span, Stmt, StmtKind};

#[derive(Debug, thiserror::Error)]
pub enum MiniConversionError {
    #[error("source does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("no mini-language construct at bytes {start}..{end}")]
    Unmatched { start: usize, end: usize },
}

#[derive(Default)]
struct Index {
    leaves: HashMap<(usize, usize), Stmt>,
    conds: HashMap<(usize, usize), Cond>,
}

impl Index {
    fn build(s: &Stmt, idx: &mut Index) {
        match &s.kind {
            StmtKind::Seq(a, b) => {
                Index::build(a, idx);
                Index::build(b, idx);
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                idx.conds.insert((cond.span.start, cond.span.end), cond.clone());
                Index::build(then_branch, idx);
                Index::build(else_branch, idx);
            }
            StmtKind::While { cond, body } => {
                idx.conds.insert((cond.span.start, cond.span.end), cond.clone());
                Index::build(body, idx);
            }
            _ => {
                idx.leaves.insert((s.span.start, s.span.end), s.clone());
            }
        }
    }
}

/// Rebuilds the slice as a mini-language program over `src`, the text the
/// CFG was built from. Dropped statements vanish, dead code becomes
/// `assume(false)`, and collapsed constructs become assumptions on their
/// test. Source spans are preserved so paths can be matched back.
pub fn to_mini(slice: &SliceProgram, cfg: &Cfg, src: &str) -> Result<Stmt, MiniConversionError> {
    let mut idx = Index::default();
    Index::build(&parse_mini(src)?, &mut idx);
    convert(&slice.tree, slice, cfg, &idx)
}

fn key(cfg: &Cfg, n: NodeId) -> (usize, usize) {
    cfg.nodes[n].range.map_or((0, 0), |r| (r.start, r.end))
}

fn leaf(cfg: &Cfg, n: NodeId, idx: &Index) -> Result<Stmt, MiniConversionError> {
    let (start, end) = key(cfg, n);
    idx.leaves.get(&(start, end)).cloned().ok_or(MiniConversionError::Unmatched { start, end })
}

fn cond(cfg: &Cfg, n: NodeId, idx: &Index) -> Result<Cond, MiniConversionError> {
    let (start, end) = key(cfg, n);
    idx.conds.get(&(start, end)).cloned().ok_or(MiniConversionError::Unmatched { start, end })
}

fn convert(t: &TNode, sl: &SliceProgram, cfg: &Cfg, idx: &Index) -> Result<Stmt, MiniConversionError> {
    Ok(match t {
        TNode::Stmt(n) if sl.keeps(*n) => leaf(cfg, *n, idx)?,
        TNode::Stmt(_) => Stmt::skip(),
        TNode::Unreachable { ranges, .. } => {
            let span = ranges.first().map_or(Span::default(), |r| Span::new(r.start, r.end));
            Stmt::new(StmtKind::Assume(Cond { expr: BoolExpr::False, span }), span)
        }
        TNode::Guard { pre, cond: c, positive, body, .. } => {
            let mut parts = Vec::new();
            for &p in pre.iter().filter(|p| sl.keeps(**p)) {
                parts.push(leaf(cfg, p, idx)?);
            }
            if sl.keeps(*c) {
                let mut test = cond(cfg, *c, idx)?;
                if !positive {
                    test.expr = test.expr.negate();
                }
                let span = test.span;
                parts.push(Stmt::new(StmtKind::Assume(test), span));
            }
            parts.push(convert(body, sl, cfg, idx)?);
            seq(parts)
        }
        TNode::If { cond: c, then_branch, else_branch, .. } => {
            let then_s = convert(then_branch, sl, cfg, idx)?;
            let else_s = match else_branch {
                Some(e) => convert(e, sl, cfg, idx)?,
                None => Stmt::skip(),
            };
            if sl.keeps(*c) {
                let test = cond(cfg, *c, idx)?;
                Stmt::synthetic(StmtKind::If { cond: test, then_branch: Box::new(then_s), else_branch: Box::new(else_s) })
            } else {
                Stmt::skip()
            }
        }
        TNode::Loop { cond: c, body, .. } => {
            if sl.keeps(*c) {
                let test = cond(cfg, *c, idx)?;
                Stmt::synthetic(StmtKind::While { cond: test, body: Box::new(convert(body, sl, cfg, idx)?) })
            } else {
                Stmt::skip()
            }
        }
        TNode::Seq { items, .. } => seq(items.iter().map(|i| convert(i, sl, cfg, idx)).collect::<Result<_, _>>()?),
    })
}

/// Sequence without the `skip`s left by dropped statements.
fn seq(parts: Vec<Stmt>) -> Stmt {
    Stmt::seq(parts.into_iter().filter(|s| !matches!(s.kind, StmtKind::Skip)).collect())
}
