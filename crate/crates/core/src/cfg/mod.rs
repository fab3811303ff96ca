// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Control-flow graphs lowered from unified syntax trees, plus the
//! structured region tree the slicer and renderer walk.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::frontend::{Language, NodeKind, Range, Role, SourceUnit, UnifiedNode};

pub type NodeId = usize;

pub const ENTRY: NodeId = 0;
pub const EXIT: NodeId = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CfgKind {
    Entry,
    Exit,
    Stmt,
    Cond,
    /// A literal `assume(false)`: execution stops here.
    AssumeFalse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Jump {
    Break,
    Continue,
    Return,
}

#[derive(Clone, Debug, Serialize)]
pub struct CfgNode {
    pub id: NodeId,
    pub kind: CfgKind,
    #[serde(skip)]
    pub ast: Option<UnifiedNode>,
    pub range: Option<Range>,
    /// First line of the node's source text.
    pub label: String,
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub opaque: bool,
    pub jump: Option<Jump>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopKind {
    While,
    For,
}

/// Structured view of the lowered body. Every CFG node other than ENTRY and
/// EXIT appears exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    Stmt(NodeId),
    Seq {
        items: Vec<Region>,
        range: Range,
    },
    If {
        cond: NodeId,
        range: Range,
        then_branch: Box<Region>,
        else_branch: Option<Box<Region>>,
    },
    Loop {
        kind: LoopKind,
        range: Range,
        init: Option<NodeId>,
        cond: NodeId,
        update: Option<NodeId>,
        body: Box<Region>,
    },
}

impl Region {
    /// CFG nodes of the region in source order.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<NodeId>) {
        match self {
            Region::Stmt(n) => out.push(*n),
            Region::Seq { items, .. } => items.iter().for_each(|r| r.collect(out)),
            Region::If { cond, then_branch, else_branch, .. } => {
                out.push(*cond);
                then_branch.collect(out);
                if let Some(e) = else_branch {
                    e.collect(out);
                }
            }
            Region::Loop { init, cond, update, body, .. } => {
                out.extend(init);
                out.push(*cond);
                body.collect(out);
                out.extend(update);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cfg {
    pub language: Language,
    pub nodes: Vec<CfgNode>,
    /// Successor lists; a COND lists its true successor first.
    pub succs: Vec<Vec<NodeId>>,
    pub entry: NodeId,
    pub exit: NodeId,
    pub region: Region,
    /// Range of the lowered function (or the whole unit).
    pub scope: Range,
    pub function: Option<String>,
    pub back_edges: BTreeSet<(NodeId, NodeId)>,
}

/// The function to analyse: the last function definition, or the whole unit
/// when it defines none.
pub fn default_target(unit: &SourceUnit) -> &UnifiedNode {
    unit.functions().last().copied().unwrap_or(&unit.root)
}

pub fn build_cfg(unit: &SourceUnit) -> Cfg {
    build_cfg_for(unit, default_target(unit))
}

/// Lowers `target`, which is either a function definition or a block.
pub fn build_cfg_for(unit: &SourceUnit, target: &UnifiedNode) -> Cfg {
    let (body, function) = match target.kind {
        NodeKind::FunctionDef => (target.child(NodeKind::Block).unwrap_or(target), target.name_hint.clone()),
        _ => (target, None),
    };
    let mut b = Builder { unit, nodes: Vec::new(), slots: Vec::new(), loops: Vec::new(), back_edges: BTreeSet::new() };
    b.add(CfgKind::Entry, None, "ENTRY".into());
    b.add(CfgKind::Exit, None, "EXIT".into());
    let (region, pending) = b.lower(body, vec![(ENTRY, 0)]);
    b.connect(&pending, EXIT);
    let succs = b
        .slots
        .iter()
        .enumerate()
        .map(|(id, s)| s.iter().map(|t| t.unwrap_or_else(|| panic!("unconnected edge from node {id}"))).collect())
        .collect();
    Cfg {
        language: unit.language,
        nodes: b.nodes,
        succs,
        entry: ENTRY,
        exit: EXIT,
        region,
        scope: target.range,
        function,
        back_edges: b.back_edges,
    }
}

type Pending = (NodeId, usize);

struct LoopCtx {
    breaks: Vec<Pending>,
    continue_to: NodeId,
}

struct Builder<'u> {
    unit: &'u SourceUnit,
    nodes: Vec<CfgNode>,
    slots: Vec<Vec<Option<NodeId>>>,
    loops: Vec<LoopCtx>,
    back_edges: BTreeSet<(NodeId, NodeId)>,
}

impl Builder<'_> {
    fn add(&mut self, kind: CfgKind, ast: Option<&UnifiedNode>, label: String) -> NodeId {
        let id = self.nodes.len();
        let du = ast.map(|a| self.unit.def_use(a)).unwrap_or_default();
        let jump = ast.and_then(jump_of);
        self.nodes.push(CfgNode {
            id,
            kind,
            ast: ast.cloned(),
            range: ast.map(|a| a.range),
            label,
            defs: du.defs,
            uses: du.uses,
            opaque: du.opaque,
            jump,
        });
        let out = match kind {
            CfgKind::Exit | CfgKind::AssumeFalse => 0,
            CfgKind::Cond => 2,
            CfgKind::Entry | CfgKind::Stmt => 1,
        };
        self.slots.push(vec![None; out]);
        id
    }

    fn add_ast(&mut self, kind: CfgKind, ast: &UnifiedNode) -> NodeId {
        let label = self.unit.node_text(ast).lines().next().unwrap_or("").trim().to_string();
        self.add(kind, Some(ast), label)
    }

    fn connect(&mut self, pending: &[Pending], to: NodeId) {
        for &(from, slot) in pending {
            self.slots[from][slot] = Some(to);
        }
    }

    fn back_edge(&mut self, pending: &[Pending], to: NodeId) {
        for &(from, _) in pending {
            self.back_edges.insert((from, to));
        }
        self.connect(pending, to);
    }

    fn lower(&mut self, node: &UnifiedNode, pending: Vec<Pending>) -> (Region, Vec<Pending>) {
        match node.kind {
            NodeKind::Block => {
                let mut items = Vec::new();
                let mut pending = pending;
                for child in node.children.iter().filter(|c| c.kind != NodeKind::Comment) {
                    let (r, p) = self.lower(child, pending);
                    items.push(r);
                    pending = p;
                }
                (Region::Seq { items, range: node.range }, pending)
            }
            NodeKind::If if node.children.len() >= 2 => {
                let cond = self.add_ast(CfgKind::Cond, &node.children[0]);
                self.connect(&pending, cond);
                let (then_r, mut out) = self.branch(&node.children[1], vec![(cond, 0)]);
                let else_r = match node.children.get(2) {
                    Some(e) => {
                        let (r, p) = self.branch(e, vec![(cond, 1)]);
                        out.extend(p);
                        Some(Box::new(r))
                    }
                    None => {
                        out.push((cond, 1));
                        None
                    }
                };
                let region = Region::If { cond, range: node.range, then_branch: Box::new(then_r), else_branch: else_r };
                (region, out)
            }
            NodeKind::While | NodeKind::For if node.children.len() >= 2 => self.lower_loop(node, pending),
            _ => {
                let kind = if is_assume_false(node, self.unit) { CfgKind::AssumeFalse } else { CfgKind::Stmt };
                let id = self.add_ast(kind, node);
                self.connect(&pending, id);
                if kind == CfgKind::AssumeFalse {
                    return (Region::Stmt(id), Vec::new());
                }
                let out = match self.nodes[id].jump {
                    Some(Jump::Return) => {
                        self.connect(&[(id, 0)], EXIT);
                        Vec::new()
                    }
                    Some(Jump::Break) if !self.loops.is_empty() => {
                        self.loops.last_mut().unwrap().breaks.push((id, 0));
                        Vec::new()
                    }
                    Some(Jump::Continue) if !self.loops.is_empty() => {
                        let to = self.loops.last().unwrap().continue_to;
                        self.back_edge(&[(id, 0)], to);
                        Vec::new()
                    }
                    _ => vec![(id, 0)],
                };
                (Region::Stmt(id), out)
            }
        }
    }

    /// A branch body; unbraced single statements are wrapped in a sequence.
    fn branch(&mut self, node: &UnifiedNode, pending: Vec<Pending>) -> (Region, Vec<Pending>) {
        let (r, p) = self.lower(node, pending);
        match r {
            Region::Seq { .. } => (r, p),
            other => (Region::Seq { items: vec![other], range: node.range }, p),
        }
    }

    fn lower_loop(&mut self, node: &UnifiedNode, mut pending: Vec<Pending>) -> (Region, Vec<Pending>) {
        let kind = if node.kind == NodeKind::While { LoopKind::While } else { LoopKind::For };
        let body_ast = node.children.last().unwrap();
        let clause = |role: Role| node.children.iter().find(|c| c.role == role && c.kind != NodeKind::ConditionExpr);
        let init = clause(Role::ForInit).map(|a| self.add_ast(CfgKind::Stmt, a));
        if let Some(i) = init {
            self.connect(&pending, i);
            pending = vec![(i, 0)];
        }
        let cond = match node.child(NodeKind::ConditionExpr) {
            Some(c) => self.add_ast(CfgKind::Cond, c),
            None => self.add(CfgKind::Cond, None, "1".into()),
        };
        self.connect(&pending, cond);
        let update = clause(Role::ForUpdate).map(|a| self.add_ast(CfgKind::Stmt, a));
        let head = update.unwrap_or(cond);
        self.loops.push(LoopCtx { breaks: Vec::new(), continue_to: head });
        let (body, body_out) = self.branch(body_ast, vec![(cond, 0)]);
        let ctx = self.loops.pop().unwrap();
        match update {
            Some(u) => {
                self.connect(&body_out, u);
                self.back_edge(&[(u, 0)], cond);
            }
            None => self.back_edge(&body_out, cond),
        }
        let mut out = vec![(cond, 1)];
        out.extend(ctx.breaks);
        (Region::Loop { kind, range: node.range, init, cond, update, body: Box::new(body) }, out)
    }
}

fn jump_of(node: &UnifiedNode) -> Option<Jump> {
    match (node.kind, node.name_hint.as_deref()) {
        (NodeKind::Return, _) => Some(Jump::Return),
        (NodeKind::Other, Some("break")) => Some(Jump::Break),
        (NodeKind::Other, Some("continue")) => Some(Jump::Continue),
        _ => None,
    }
}

fn is_assume_false(node: &UnifiedNode, unit: &SourceUnit) -> bool {
    node.kind == NodeKind::Assume
        && node.child(NodeKind::ConditionExpr).is_some_and(|c| is_false_literal(unit.node_text(c)))
}

pub fn is_false_literal(text: &str) -> bool {
    matches!(text.trim(), "0" | "false" | "False")
}

impl Cfg {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 2
    }

    pub fn edge_count(&self) -> usize {
        self.succs.iter().map(Vec::len).sum()
    }

    pub fn preds(&self) -> Vec<Vec<NodeId>> {
        let mut p = vec![Vec::new(); self.nodes.len()];
        for (from, ss) in self.succs.iter().enumerate() {
            for &to in ss {
                p[to].push(from);
            }
        }
        p
    }

    pub fn node_for_range(&self, range: Range) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.range == Some(range)).map(|n| n.id)
    }

    pub fn conds(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.kind == CfgKind::Cond).map(|n| n.id).collect()
    }

    /// Source text of a node.
    pub fn text<'a>(&'a self, unit: &'a SourceUnit, id: NodeId) -> &'a str {
        match self.nodes[id].range {
            Some(r) => &unit.text[r.start..r.end],
            None => &self.nodes[id].label,
        }
    }

    pub fn reachable_from_entry(&self) -> Vec<bool> {
        reach(self.entry, &self.succs)
    }

    pub fn reaches_exit(&self) -> Vec<bool> {
        reach(self.exit, &self.preds())
    }

    /// Nodes that are unreachable from ENTRY or cannot reach EXIT.
    pub fn flagged(&self) -> Vec<NodeId> {
        let from = self.reachable_from_entry();
        let to = self.reaches_exit();
        (0..self.nodes.len()).filter(|&i| !from[i] || !to[i]).collect()
    }

    /// Checks the structural invariants: entry without predecessors, exit
    /// without successors, out-degree 2 for conditions and 1 for statements.
    pub fn check(&self) -> Result<(), String> {
        let preds = self.preds();
        if !preds[self.entry].is_empty() {
            return Err("ENTRY has predecessors".into());
        }
        for n in &self.nodes {
            let want = match n.kind {
                CfgKind::Entry | CfgKind::Stmt => 1,
                CfgKind::Cond => 2,
                CfgKind::Exit | CfgKind::AssumeFalse => 0,
            };
            if self.succs[n.id].len() != want {
                return Err(format!("node {} ({:?}) has {} successors", n.id, n.kind, self.succs[n.id].len()));
            }
        }
        let mut seen = BTreeSet::new();
        for id in self.region.nodes() {
            if !seen.insert(id) || id <= EXIT {
                return Err(format!("region lists node {id} twice or lists an anchor"));
            }
        }
        if seen.len() + 2 != self.nodes.len() {
            return Err("region does not cover every node".into());
        }
        Ok(())
    }

    /// Structural control dependences: each node maps to the conditions of
    /// its enclosing branches and loops. Statements following a nested jump
    /// also depend on the conditions guarding that jump.
    pub fn control_deps(&self) -> Vec<BTreeSet<NodeId>> {
        let mut deps = vec![BTreeSet::new(); self.nodes.len()];
        control(&self.region, &self.nodes, &BTreeSet::new(), &mut deps);
        deps
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph cfg {\n  node [shape=box, fontname=monospace];\n");
        for n in &self.nodes {
            let shape = match n.kind {
                CfgKind::Cond => "diamond",
                CfgKind::Entry | CfgKind::Exit => "oval",
                CfgKind::AssumeFalse => "octagon",
                CfgKind::Stmt => "box",
            };
            let label = n.label.replace('\\', "\\\\").replace('"', "\\\"");
            let _ = writeln!(s, "  n{} [label=\"{}: {}\", shape={}];", n.id, n.id, label, shape);
        }
        for (from, ss) in self.succs.iter().enumerate() {
            for (k, to) in ss.iter().enumerate() {
                let attr = match (self.nodes[from].kind, k) {
                    (CfgKind::Cond, 0) => " [label=T]",
                    (CfgKind::Cond, _) => " [label=F]",
                    _ => "",
                };
                let _ = writeln!(s, "  n{from} -> n{to}{attr};");
            }
        }
        s.push_str("}\n");
        s
    }
}

fn reach(start: NodeId, adj: &[Vec<NodeId>]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        if std::mem::replace(&mut seen[n], true) {
            continue;
        }
        stack.extend(adj[n].iter().copied());
    }
    seen
}

/// Returns the conditions guarding jumps inside `r` that escape it.
fn control(r: &Region, nodes: &[CfgNode], outer: &BTreeSet<NodeId>, deps: &mut [BTreeSet<NodeId>]) -> BTreeSet<NodeId> {
    match r {
        Region::Stmt(n) => {
            deps[*n].extend(outer.iter().copied());
            match nodes[*n].jump {
                Some(_) => outer.clone(),
                None => BTreeSet::new(),
            }
        }
        Region::Seq { items, .. } => {
            let mut ctx = outer.clone();
            let mut escaping = BTreeSet::new();
            for item in items {
                let esc = control(item, nodes, &ctx, deps);
                ctx.extend(esc.iter().copied());
                escaping.extend(esc);
            }
            escaping
        }
        Region::If { cond, then_branch, else_branch, .. } => {
            deps[*cond].extend(outer.iter().copied());
            let mut inner = outer.clone();
            inner.insert(*cond);
            let mut esc = control(then_branch, nodes, &inner, deps);
            if let Some(e) = else_branch {
                esc.extend(control(e, nodes, &inner, deps));
            }
            esc
        }
        Region::Loop { init, cond, update, body, .. } => {
            let mut inner = outer.clone();
            inner.insert(*cond);
            if let Some(i) = init {
                deps[*i].extend(outer.iter().copied());
            }
            // The loop test runs again after every iteration.
            deps[*cond].extend(inner.iter().copied());
            let esc = control(body, nodes, &inner, deps);
            deps[*cond].extend(esc.iter().copied());
            if let Some(u) = update {
                deps[*u].extend(inner.iter().copied());
                deps[*u].extend(esc.iter().copied());
            }
            // Breaks and continues stay inside; returns escape further.
            let returns: BTreeSet<NodeId> =
                if body.nodes().iter().any(|&n| nodes[n].jump == Some(Jump::Return)) { esc } else { BTreeSet::new() };
            returns
        }
    }
}

/// Statement and condition counts, keyed by kind; handy for fixtures.
pub fn kind_histogram(cfg: &Cfg) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for n in &cfg.nodes {
        let k = match n.kind {
            CfgKind::Entry => "entry",
            CfgKind::Exit => "exit",
            CfgKind::Stmt => "stmt",
            CfgKind::Cond => "cond",
            CfgKind::AssumeFalse => "assume-false",
        };
        *m.entry(k).or_insert(0) += 1;
    }
    m
}
