// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Truncation of a program to one partition, simplification of the
//! truncated program, and backward slicing against a criterion.

mod mini;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::cfg::{Cfg, CfgKind, LoopKind, NodeId, Region};
use crate::frontend::{NodeKind, Range};
use crate::partition::{NodeSet, Partition};

pub use mini::{to_mini, MiniConversionError};

/// Truncated program tree. Mirrors [`Region`] with two extra shapes: an
/// unreachable marker and a construct collapsed into an assumption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TNode {
    Stmt(NodeId),
    /// `assume(0)` standing for the listed source ranges. No ranges means an
    /// implicit empty branch.
    Unreachable { ranges: Vec<Range>, nodes: Vec<NodeId> },
    /// `assume(cond)` (or its negation) followed by `body`, replacing the
    /// construct at `range`. `pre` holds statements that run first, such as
    /// a for-loop initializer.
    Guard { range: Range, pre: Vec<NodeId>, cond: NodeId, positive: bool, body: Box<TNode> },
    If { cond: NodeId, range: Range, then_branch: Box<TNode>, else_branch: Option<Box<TNode>> },
    Loop { kind: LoopKind, range: Range, init: Option<NodeId>, cond: NodeId, update: Option<NodeId>, body: Box<TNode> },
    Seq { items: Vec<TNode>, range: Range },
}

impl TNode {
    /// True for `assume(0)` and sequences reduced to it.
    pub fn is_dead(&self) -> bool {
        match self {
            TNode::Unreachable { .. } => true,
            TNode::Seq { items, .. } => items.len() == 1 && items[0].is_dead(),
            _ => false,
        }
    }

    /// Source ranges covered by this node (the construct ranges, or the
    /// statement range for leaves).
    fn ranges(&self, cfg: &Cfg) -> Vec<Range> {
        match self {
            TNode::Stmt(n) => cfg.nodes[*n].range.into_iter().collect(),
            TNode::Unreachable { ranges, .. } => ranges.clone(),
            TNode::Guard { range, .. } | TNode::If { range, .. } | TNode::Loop { range, .. } => vec![*range],
            TNode::Seq { items, .. } => items.iter().flat_map(|i| i.ranges(cfg)).collect(),
        }
    }

    /// CFG nodes mentioned anywhere in the tree, in source order.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.visit(&mut |t| match t {
            TNode::Stmt(n) => out.push(*n),
            TNode::Unreachable { nodes, .. } => out.extend(nodes),
            TNode::Guard { pre, cond, .. } => {
                out.extend(pre);
                out.push(*cond);
            }
            TNode::If { cond, .. } => out.push(*cond),
            TNode::Loop { init, cond, update, .. } => {
                out.extend(init);
                out.push(*cond);
                out.extend(update);
            }
            TNode::Seq { .. } => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TNode)) {
        f(self);
        match self {
            TNode::Guard { body, .. } | TNode::Loop { body, .. } => body.visit(f),
            TNode::If { then_branch, else_branch, .. } => {
                then_branch.visit(f);
                if let Some(e) = else_branch {
                    e.visit(f);
                }
            }
            TNode::Seq { items, .. } => items.iter().for_each(|i| i.visit(f)),
            TNode::Stmt(_) | TNode::Unreachable { .. } => {}
        }
    }

    /// Number of tree nodes; simplification strictly reduces it.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn has_escaping_jump(&self, cfg: &Cfg) -> bool {
        escapes(self, cfg, false)
    }
}

/// Whether a jump inside `t` can leave it. Breaks and continues inside a
/// nested loop stay in that loop.
fn escapes(t: &TNode, cfg: &Cfg, in_loop: bool) -> bool {
    match t {
        TNode::Stmt(n) => match cfg.nodes[*n].jump {
            Some(crate::cfg::Jump::Return) => true,
            Some(_) => !in_loop,
            None => false,
        },
        TNode::Unreachable { .. } => false,
        TNode::Guard { body, .. } => escapes(body, cfg, in_loop),
        TNode::If { then_branch, else_branch, .. } => {
            escapes(then_branch, cfg, in_loop) || else_branch.as_ref().is_some_and(|e| escapes(e, cfg, in_loop))
        }
        TNode::Loop { body, .. } => escapes(body, cfg, true),
        TNode::Seq { items, .. } => items.iter().any(|i| escapes(i, cfg, in_loop)),
    }
}

/// Replaces every construct not covered by `coverage` with `assume(0)`.
/// An empty branch of an `if` outside any loop counts as not taken when
/// the other branch is covered, since a single pass takes one branch.
pub fn truncate_tree(cfg: &Cfg, coverage: &NodeSet, simplify: bool) -> TNode {
    let t = trunc(&cfg.region, cfg, coverage, false, false);
    if simplify {
        simplify_tree(t, cfg)
    } else {
        t
    }
}

fn unreachable(region: &Region, cfg: &Cfg) -> TNode {
    let range = match region {
        Region::Stmt(n) => cfg.nodes[*n].range,
        Region::Seq { range, .. } | Region::If { range, .. } | Region::Loop { range, .. } => Some(*range),
    };
    TNode::Unreachable { ranges: range.into_iter().collect(), nodes: region.nodes() }
}

/// With `identity` set nothing is refined and source `assume(false)`
/// statements stay as written.
fn trunc(region: &Region, cfg: &Cfg, cov: &NodeSet, in_loop: bool, identity: bool) -> TNode {
    match region {
        Region::Stmt(n) => {
            if cov.contains(*n) && (identity || cfg.nodes[*n].kind != CfgKind::AssumeFalse) {
                TNode::Stmt(*n)
            } else {
                unreachable(region, cfg)
            }
        }
        Region::Seq { items, range } => {
            TNode::Seq { items: items.iter().map(|r| trunc(r, cfg, cov, in_loop, identity)).collect(), range: *range }
        }
        Region::If { cond, range, then_branch, else_branch } => {
            if !cov.contains(*cond) {
                return unreachable(region, cfg);
            }
            let covered = |r: &Region| r.nodes().iter().any(|&n| cov.contains(n));
            let empty = |r: &Region| r.nodes().is_empty();
            let mut then_t = trunc(then_branch, cfg, cov, in_loop, identity);
            let mut else_t = else_branch.as_ref().map(|e| trunc(e, cfg, cov, in_loop, identity));
            if !in_loop && !identity {
                let else_empty = else_branch.as_ref().is_none_or(|e| empty(e));
                if else_empty && !empty(then_branch) && covered(then_branch) {
                    let at = else_branch.as_ref().map_or(*range, |e| region_range(e));
                    else_t = Some(TNode::Seq { items: vec![implicit_unreachable()], range: at });
                }
                if empty(then_branch) && else_branch.as_ref().is_some_and(|e| !empty(e) && covered(e)) {
                    then_t = TNode::Seq { items: vec![implicit_unreachable()], range: region_range(then_branch) };
                }
            }
            TNode::If { cond: *cond, range: *range, then_branch: Box::new(then_t), else_branch: else_t.map(Box::new) }
        }
        Region::Loop { kind, range, init, cond, update, body } => {
            if !cov.contains(*cond) {
                return unreachable(region, cfg);
            }
            let update = update.filter(|u| cov.contains(*u));
            TNode::Loop {
                kind: *kind,
                range: *range,
                init: *init,
                cond: *cond,
                update,
                body: Box::new(trunc(body, cfg, cov, true, identity)),
            }
        }
    }
}

fn region_range(r: &Region) -> Range {
    match r {
        Region::Seq { range, .. } | Region::If { range, .. } | Region::Loop { range, .. } => *range,
        Region::Stmt(_) => Range::default(),
    }
}

fn implicit_unreachable() -> TNode {
    TNode::Unreachable { ranges: Vec::new(), nodes: Vec::new() }
}

fn merge_dead(parts: impl IntoIterator<Item = TNode>, cfg: &Cfg) -> TNode {
    let mut ranges = Vec::new();
    let mut nodes = Vec::new();
    for p in parts {
        ranges.extend(p.ranges(cfg));
        nodes.extend(p.nodes());
    }
    TNode::Unreachable { ranges, nodes }
}

/// Applies the rewrite rules bottom-up:
/// `assume(0); C` and `C; assume(0)` (no jump leaving C) become `assume(0)`;
/// an `if` with one dead branch becomes an assumption followed by the other
/// branch; a loop with a dead body becomes the negated loop test.
pub fn simplify_tree(t: TNode, cfg: &Cfg) -> TNode {
    match t {
        TNode::Seq { items, range } => {
            let items: Vec<TNode> = items.into_iter().map(|i| simplify_tree(i, cfg)).collect();
            let Some(first_dead) = items.iter().position(TNode::is_dead) else {
                return TNode::Seq { items, range };
            };
            // Everything after the first dead item is unreachable.
            let mut start = first_dead;
            while start > 0 && !items[start - 1].has_escaping_jump(cfg) {
                start -= 1;
            }
            let mut items = items;
            let dead: Vec<TNode> = items.drain(start..).collect();
            items.push(merge_dead(dead, cfg));
            TNode::Seq { items, range }
        }
        TNode::If { cond, range, then_branch, else_branch } => {
            let then_t = simplify_tree(*then_branch, cfg);
            let else_t = else_branch.map(|e| simplify_tree(*e, cfg));
            let else_dead = else_t.as_ref().is_some_and(TNode::is_dead);
            match (then_t.is_dead(), else_dead) {
                (true, true) => TNode::Unreachable { ranges: vec![range], nodes: all_nodes(cond, &then_t, else_t.as_ref()) },
                (false, true) => TNode::Guard { range, pre: Vec::new(), cond, positive: true, body: Box::new(then_t) },
                (true, false) => {
                    let body = else_t.unwrap_or(TNode::Seq { items: Vec::new(), range: Range::new(range.file_id, range.end, range.end) });
                    TNode::Guard { range, pre: Vec::new(), cond, positive: false, body: Box::new(body) }
                }
                (false, false) => TNode::If { cond, range, then_branch: Box::new(then_t), else_branch: else_t.map(Box::new) },
            }
        }
        TNode::Loop { kind, range, init, cond, update, body } => {
            let body = simplify_tree(*body, cfg);
            if body.is_dead() {
                let empty = TNode::Seq { items: Vec::new(), range: Range::new(range.file_id, range.end, range.end) };
                return TNode::Guard { range, pre: init.into_iter().collect(), cond, positive: false, body: Box::new(empty) };
            }
            TNode::Loop { kind, range, init, cond, update, body: Box::new(body) }
        }
        TNode::Guard { range, pre, cond, positive, body } => {
            let body = simplify_tree(*body, cfg);
            if body.is_dead() && pre.iter().all(|&p| cfg.nodes[p].jump.is_none()) {
                let mut nodes = pre.clone();
                nodes.push(cond);
                nodes.extend(body.nodes());
                return TNode::Unreachable { ranges: vec![range], nodes };
            }
            TNode::Guard { range, pre, cond, positive, body: Box::new(body) }
        }
        leaf => leaf,
    }
}

fn all_nodes(cond: NodeId, a: &TNode, b: Option<&TNode>) -> Vec<NodeId> {
    let mut v = vec![cond];
    v.extend(a.nodes());
    if let Some(b) = b {
        v.extend(b.nodes());
    }
    v
}

/// A synthesized assumption: the test of `cond` replaced the construct at
/// `range` because one of its branches (or its loop body) was truncated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SynthAssume {
    pub cond: NodeId,
    pub positive: bool,
    pub range: Range,
    pub kept: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SliceCriterion {
    pub vars: BTreeSet<String>,
    /// Nodes that are always kept, such as pre/post annotations.
    pub anchors: BTreeSet<NodeId>,
}

impl SliceCriterion {
    pub fn vars<I: IntoIterator<Item = S>, S: Into<String>>(vars: I) -> Self {
        SliceCriterion { vars: vars.into_iter().map(Into::into).collect(), anchors: BTreeSet::new() }
    }
}

#[derive(Clone, Debug)]
pub struct SliceProgram {
    pub partition: usize,
    pub coverage: NodeSet,
    pub tree: TNode,
    /// Statements, conditions and synthesized assumptions (by condition id)
    /// that survive.
    pub kept: BTreeSet<NodeId>,
    pub synth_assumes: Vec<SynthAssume>,
    pub unreachable_marks: Vec<Range>,
    pub criterion: BTreeSet<String>,
    /// Variables the slice depends on once slicing reached its fixpoint.
    pub tracked: BTreeSet<String>,
}

impl SliceProgram {
    /// The whole body reduced to `assume(0)`: nothing to verify.
    pub fn is_vacuous(&self) -> bool {
        self.tree.is_dead()
    }

    pub fn keeps(&self, n: NodeId) -> bool {
        self.kept.contains(&n)
    }

    /// Kept statements plus kept synthesized assumptions.
    pub fn statement_count(&self, cfg: &Cfg) -> usize {
        let mut n = 0;
        self.tree.visit(&mut |t| match t {
            TNode::Stmt(s) if self.keeps(*s) => n += 1,
            TNode::If { cond, .. } | TNode::Loop { cond, .. } if self.keeps(*cond) => n += 1,
            TNode::Loop { init, update, .. } => {
                n += init.iter().chain(update).filter(|s| self.keeps(**s)).count();
            }
            TNode::Guard { pre, cond, .. } => {
                n += pre.iter().filter(|s| self.keeps(**s)).count();
                n += usize::from(self.keeps(*cond));
            }
            TNode::Unreachable { ranges, .. } if !ranges.is_empty() => n += 1,
            _ => {}
        });
        let _ = cfg;
        n
    }
}

/// Truncates and simplifies the program to `part`; every remaining node is
/// kept.
pub fn truncate(cfg: &Cfg, part: &Partition) -> SliceProgram {
    from_tree(cfg, part.id, part.coverage.clone(), truncate_tree(cfg, &part.coverage, true))
}

/// The whole program with every node kept.
pub fn full_program(cfg: &Cfg) -> SliceProgram {
    let all: NodeSet = (0..cfg.len()).collect();
    from_tree(cfg, usize::MAX, all.clone(), trunc(&cfg.region, cfg, &all, false, true))
}

/// Like [`truncate`] without the rewrite rules.
pub fn truncate_unsimplified(cfg: &Cfg, part: &Partition) -> SliceProgram {
    from_tree(cfg, part.id, part.coverage.clone(), truncate_tree(cfg, &part.coverage, false))
}

fn from_tree(cfg: &Cfg, partition: usize, coverage: NodeSet, tree: TNode) -> SliceProgram {
    let mut kept = BTreeSet::new();
    let mut synth = Vec::new();
    let mut marks = Vec::new();
    tree.visit(&mut |t| match t {
        TNode::Stmt(n) => {
            kept.insert(*n);
        }
        TNode::Guard { range, pre, cond, positive, .. } => {
            kept.extend(pre.iter().copied());
            kept.insert(*cond);
            synth.push(SynthAssume { cond: *cond, positive: *positive, range: *range, kept: true });
        }
        TNode::If { cond, .. } => {
            kept.insert(*cond);
        }
        TNode::Loop { init, cond, update, .. } => {
            kept.extend(init.iter().chain(update.iter()).copied());
            kept.insert(*cond);
        }
        TNode::Unreachable { ranges, .. } => marks.extend(ranges.iter().copied()),
        TNode::Seq { .. } => {}
    });
    let _ = cfg;
    SliceProgram {
        partition,
        coverage,
        tree,
        kept,
        synth_assumes: synth,
        unreachable_marks: marks,
        criterion: BTreeSet::new(),
        tracked: BTreeSet::new(),
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Item {
    /// A statement; the flag is set inside a loop.
    Stmt(NodeId, bool),
    /// Test of a surviving `if` or loop.
    Cond(NodeId),
    /// Synthesized assumption; the flag is set inside a loop body.
    Guard(NodeId, bool),
    /// `assume(0)` inside the listed surviving tests.
    Dead(Vec<NodeId>),
}

fn items(t: &TNode, enclosing: &mut Vec<NodeId>, loops: usize, out: &mut Vec<Item>) {
    match t {
        TNode::Stmt(n) => out.push(Item::Stmt(*n, loops > 0)),
        TNode::Unreachable { .. } => out.push(Item::Dead(enclosing.clone())),
        TNode::Guard { pre, cond, body, .. } => {
            out.extend(pre.iter().map(|&p| Item::Stmt(p, loops > 0)));
            out.push(Item::Guard(*cond, loops > 0));
            items(body, enclosing, loops, out);
        }
        TNode::If { cond, then_branch, else_branch, .. } => {
            out.push(Item::Cond(*cond));
            enclosing.push(*cond);
            items(then_branch, enclosing, loops, out);
            if let Some(e) = else_branch {
                items(e, enclosing, loops, out);
            }
            enclosing.pop();
        }
        TNode::Loop { init, cond, update, body, .. } => {
            out.extend(init.iter().map(|&p| Item::Stmt(p, loops > 0)));
            out.push(Item::Cond(*cond));
            enclosing.push(*cond);
            items(body, enclosing, loops + 1, out);
            enclosing.pop();
            out.extend(update.iter().map(|&p| Item::Stmt(p, true)));
        }
        TNode::Seq { items: xs, .. } => xs.iter().for_each(|x| items(x, enclosing, loops, out)),
    }
}

/// Backward slice of a truncation. Sweeps the statements in reverse source
/// order until nothing changes, keeping a node when it writes a tracked
/// variable, when it is a surviving test that reads a tracked variable or
/// guards a kept node, or when it must stay regardless (jumps, anchors,
/// opaque statements). Kept nodes add what they read to the tracked set.
/// Assumptions, synthesized or written in the source, survive when they read
/// a variable of the criterion itself, or outside loops a tracked one.
pub fn back_slice(trunc: &SliceProgram, cfg: &Cfg, criterion: &SliceCriterion) -> SliceProgram {
    if criterion.vars.is_empty() {
        log::warn!("empty slicing criterion: only anchors, jumps and opaque statements are kept");
    }
    let mut order = Vec::new();
    items(&trunc.tree, &mut Vec::new(), 0, &mut order);
    let deps = cfg.control_deps();
    let conds: BTreeSet<NodeId> =
        order.iter().filter_map(|i| if let Item::Cond(c) = i { Some(*c) } else { None }).collect();
    let reads_criterion = |n: NodeId| !cfg.nodes[n].uses.is_disjoint(&criterion.vars);
    // An assumption inside a loop constrains a single iteration and stays
    // only when it reads the criterion; elsewhere any tracked read keeps it.
    let keep_assume = |n: NodeId, in_loop: bool, tracked: &BTreeSet<String>| {
        reads_criterion(n) || (!in_loop && !cfg.nodes[n].uses.is_disjoint(tracked))
    };
    let mut tracked = criterion.vars.clone();
    let mut kept: BTreeSet<NodeId> = BTreeSet::new();
    // Names read or written by kept nodes; their bare declarations stay so
    // the rendered slice still declares what it uses.
    let mut mentioned: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = (kept.len(), tracked.len(), mentioned.len());
        for item in order.iter().rev() {
            let (id, keep) = match *item {
                // Dead code stays, and with it every test leading to it.
                Item::Dead(ref within) => {
                    for &c in within {
                        if kept.insert(c) {
                            tracked.extend(cfg.nodes[c].uses.iter().cloned());
                        }
                    }
                    continue;
                }
                Item::Stmt(n, in_loop) => {
                    let node = &cfg.nodes[n];
                    let is_assume = node.ast.as_ref().is_some_and(|a| a.kind == NodeKind::Assume);
                    let is_decl = node.ast.as_ref().is_some_and(|a| a.kind == NodeKind::Declaration);
                    let keep = criterion.anchors.contains(&n)
                        || node.jump.is_some()
                        || node.opaque
                        || (is_assume && keep_assume(n, in_loop, &tracked))
                        || (!is_assume && !node.defs.is_disjoint(&tracked))
                        || (is_decl && !node.defs.is_disjoint(&mentioned));
                    (n, keep)
                }
                Item::Cond(c) => {
                    let node = &cfg.nodes[c];
                    let guards_kept = kept.iter().any(|&k| deps[k].contains(&c));
                    (c, guards_kept || !node.uses.is_disjoint(&tracked) || !node.defs.is_disjoint(&tracked))
                }
                Item::Guard(c, in_loop) => (c, criterion.anchors.contains(&c) || keep_assume(c, in_loop, &tracked)),
            };
            if keep && kept.insert(id) {
                tracked.extend(cfg.nodes[id].uses.iter().cloned());
                mentioned.extend(cfg.nodes[id].uses.iter().chain(&cfg.nodes[id].defs).cloned());
            }
        }
        // Surviving tests guarding kept nodes, found by control dependence.
        let extra: Vec<NodeId> =
            kept.iter().flat_map(|&k| deps[k].iter().copied()).filter(|c| conds.contains(c) && !kept.contains(c)).collect();
        for c in extra {
            if kept.insert(c) {
                tracked.extend(cfg.nodes[c].uses.iter().cloned());
            }
        }
        if (kept.len(), tracked.len(), mentioned.len()) == before {
            break;
        }
    }
    let synth_assumes =
        trunc.synth_assumes.iter().map(|s| SynthAssume { kept: kept.contains(&s.cond), ..s.clone() }).collect();
    SliceProgram {
        partition: trunc.partition,
        coverage: trunc.coverage.clone(),
        tree: trunc.tree.clone(),
        kept,
        synth_assumes,
        unreachable_marks: trunc.unreachable_marks.clone(),
        criterion: criterion.vars.clone(),
        tracked,
    }
}
