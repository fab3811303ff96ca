// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use super::{attach_comments, DefUse, GrammarAdapter, Language, NodeKind, Range, UnifiedNode, INPUT_STREAM, OUTPUT_STREAM};
use crate::mini_lang::ast::{Expr, StmtKind};
use crate::mini_lang::parser::{parse_bool_expr, parse_stmt, parse_syntax, Block, ElsePart, SyntaxKind, SyntaxStmt};

pub struct MiniAdapter;

impl GrammarAdapter for MiniAdapter {
    fn language(&self) -> Language {
        Language::Mini
    }

    fn parse(&self, src: &str, file_id: u32) -> UnifiedNode {
        let whole = Range::new(file_id, 0, src.len());
        match parse_syntax(src) {
            Ok(tree) => {
                let mut root = unify_block(&tree.root, file_id);
                let comments =
                    tree.comments.iter().map(|s| UnifiedNode::new(NodeKind::Comment, Range::new(file_id, s.start, s.end))).collect();
                attach_comments(&mut root, comments);
                root
            }
            Err(err) => {
                log::warn!("mini-language parse error at {}:{}: {}", err.line, err.column, err.message);
                UnifiedNode::new(NodeKind::Block, whole).with_children(vec![UnifiedNode::new(NodeKind::Other, whole)])
            }
        }
    }

    fn def_use(&self, node: &UnifiedNode, src: &str) -> DefUse {
        let text = node.text(src);
        let mut du = DefUse::default();
        if node.kind == NodeKind::ConditionExpr {
            match parse_bool_expr(text) {
                Ok(b) => du.uses = b.vars(),
                Err(_) => du.opaque = true,
            }
            return du;
        }
        let stmt = match parse_stmt(text) {
            Ok(s) => s,
            Err(_) => {
                du.opaque = true;
                return du;
            }
        };
        let acc = stmt.access();
        du.defs = acc.writes;
        du.uses = acc.reads;
        match &stmt.kind {
            StmtKind::Read(_) => {
                du.defs.insert(INPUT_STREAM.into());
                du.uses.insert(INPUT_STREAM.into());
            }
            StmtKind::Write(_) => {
                du.defs.insert(OUTPUT_STREAM.into());
                du.uses.insert(OUTPUT_STREAM.into());
            }
            _ => {}
        }
        du
    }

    fn assume_text(&self, cond: &str, positive: bool) -> String {
        if positive {
            format!("assume({cond})")
        } else {
            format!("assume(!({cond}))")
        }
    }

    fn unreachable_text(&self) -> String {
        "assume(0)".to_string()
    }

    fn line_comment(&self) -> &'static str {
        "//"
    }
}

fn range(file_id: u32, span: crate::mini_lang::Span) -> Range {
    Range::new(file_id, span.start, span.end)
}

fn unify_block(block: &Block, file_id: u32) -> UnifiedNode {
    let children = block.stmts.iter().map(|s| unify_stmt(s, file_id)).collect();
    UnifiedNode::new(NodeKind::Block, range(file_id, block.span)).with_children(children)
}

fn unify_stmt(s: &SyntaxStmt, file_id: u32) -> UnifiedNode {
    let r = range(file_id, s.span);
    match &s.kind {
        SyntaxKind::Leaf(stmt) => match &stmt.kind {
            StmtKind::Skip => UnifiedNode::new(NodeKind::Other, r).with_name("skip"),
            StmtKind::Assume(c) => UnifiedNode::new(NodeKind::Assume, r)
                .with_children(vec![UnifiedNode::new(NodeKind::ConditionExpr, range(file_id, c.span))]),
            StmtKind::Assign { target, value: Expr::Insert(v, _) } if v == target => {
                UnifiedNode::new(NodeKind::Call, r).with_name("insert")
            }
            StmtKind::Assign { target, value: Expr::Delete(v, _) } if v == target => {
                UnifiedNode::new(NodeKind::Call, r).with_name("delete")
            }
            StmtKind::Assign { .. } => UnifiedNode::new(NodeKind::Assignment, r),
            StmtKind::Read(_) => UnifiedNode::new(NodeKind::Call, r).with_name("read"),
            StmtKind::Write(_) => UnifiedNode::new(NodeKind::Call, r).with_name("write"),
            StmtKind::Seq(..) | StmtKind::If { .. } | StmtKind::While { .. } => UnifiedNode::new(NodeKind::Other, r),
        },
        SyntaxKind::If { cond, then_block, else_part } => {
            let mut children =
                vec![UnifiedNode::new(NodeKind::ConditionExpr, range(file_id, cond.span)), unify_block(then_block, file_id)];
            match else_part {
                Some(ElsePart::Block(b)) => children.push(unify_block(b, file_id)),
                Some(ElsePart::If(inner)) => children.push(unify_stmt(inner, file_id)),
                None => {}
            }
            UnifiedNode::new(NodeKind::If, r).with_children(children)
        }
        SyntaxKind::While { cond, body } => UnifiedNode::new(NodeKind::While, r)
            .with_children(vec![UnifiedNode::new(NodeKind::ConditionExpr, range(file_id, cond.span)), unify_block(body, file_id)]),
    }
}
