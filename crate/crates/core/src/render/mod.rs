// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Turns a slice back into source text. Kept code is copied byte for byte,
//! dropped statements are deleted with their comments, and collapsed
//! constructs are replaced by assumptions at the original indentation.

mod context;
mod range_map;
mod tokens;

use serde::Serialize;

use crate::cfg::{Cfg, NodeId};
use crate::frontend::{parse_unit_with, AdapterRegistry, GrammarAdapter, Language, Range, SourceUnit};
use crate::slice::{SliceProgram, TNode};

pub use context::{gather_context, slice_identifiers, ContextItem};
pub use range_map::{Directive, RangeConflict, RangeMap};
pub use tokens::{count_tokens, default_tokenizer, tokenizer_by_name, SimpleTokenizer, Tokenizer};
#[cfg(feature = "bpe")]
pub use tokens::BpeTokenizer;

#[derive(Clone, Debug, Serialize)]
pub struct RenderedSlice {
    pub partition: usize,
    /// Context declarations followed by the sliced function.
    pub text: String,
    /// The sliced function alone.
    pub function_text: String,
    pub language: Language,
    pub token_count: usize,
    pub tokenizer: String,
    /// Kept statements, tests and assumptions, plus unreachable markers.
    pub stmt_count: usize,
    pub context_items: Vec<ContextItem>,
    pub kept_nodes: Vec<NodeId>,
}

#[derive(Clone, Copy, Debug)]
pub struct RenderOptions {
    pub include_context: bool,
    /// Matched functions longer than this are reduced to their signature.
    pub context_line_cap: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { include_context: true, context_line_cap: 40 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("rendered slice does not reparse ({errors} unrecognized regions):\n{text}")]
    Reparse { text: String, errors: usize },
    #[error("overlapping rewrite ranges: {0}")]
    Conflict(#[from] RangeConflict),
}

pub fn render_slice(slice: &SliceProgram, cfg: &Cfg, unit: &SourceUnit, tokenizer: &dyn Tokenizer) -> Result<RenderedSlice, RenderError> {
    render_slice_with(slice, cfg, unit, tokenizer, RenderOptions::default())
}

pub fn render_slice_with(
    slice: &SliceProgram,
    cfg: &Cfg,
    unit: &SourceUnit,
    tokenizer: &dyn Tokenizer,
    opts: RenderOptions,
) -> Result<RenderedSlice, RenderError> {
    let r = Renderer { src: &unit.text, cfg, slice, adapter: unit.adapter.as_ref(), lang: unit.language };
    let mut map = RangeMap::new();
    let visible = r.emit_block(&cfg.region, &slice.tree, &mut map, true)?;
    let function_text = map.apply(r.src, cfg.scope.start, cfg.scope.end);
    if !visible {
        log::debug!("partition {}: nothing left of the function body", slice.partition);
    }
    check_reparse(&function_text, unit, cfg)?;
    let context_items = if opts.include_context { gather_context(slice, cfg, unit, opts.context_line_cap) } else { Vec::new() };
    let mut text = String::new();
    for item in &context_items {
        text.push_str(&item.text);
        text.push('\n');
    }
    text.push_str(&function_text);
    let markers = r.marker_count(&slice.tree);
    Ok(RenderedSlice {
        partition: slice.partition,
        token_count: tokenizer.count(&text),
        tokenizer: tokenizer.name().to_string(),
        text,
        function_text,
        language: unit.language,
        stmt_count: slice.kept.len() + markers,
        context_items,
        kept_nodes: slice.kept.iter().copied().collect(),
    })
}

fn check_reparse(text: &str, unit: &SourceUnit, cfg: &Cfg) -> Result<(), RenderError> {
    let mut reg = AdapterRegistry::empty();
    reg.register(unit.adapter.clone());
    let reparsed = parse_unit_with(&reg, text.as_bytes(), unit.language, unit.file_id).expect("rendered text is UTF-8");
    let errors = reparsed.error_nodes();
    let before = unit.root.count(|n| {
        n.kind == crate::frontend::NodeKind::Other && n.name_hint.is_none() && cfg.scope.contains(&n.range)
    });
    if errors > before {
        return Err(RenderError::Reparse { text: text.to_string(), errors });
    }
    Ok(())
}

struct Renderer<'a> {
    src: &'a str,
    cfg: &'a Cfg,
    slice: &'a SliceProgram,
    adapter: &'a dyn GrammarAdapter,
    lang: Language,
}

/// Leading whitespace of the line containing `offset`.
fn line_indent(src: &str, offset: usize) -> &str {
    let start = src[..offset].rfind('\n').map_or(0, |i| i + 1);
    let line = &src[start..];
    &line[..line.len() - line.trim_start_matches([' ', '\t']).len()]
}

fn at_line_start(src: &str, offset: usize) -> bool {
    let start = src[..offset].rfind('\n').map_or(0, |i| i + 1);
    src[start..offset].trim_matches([' ', '\t']).is_empty()
}

impl Renderer<'_> {
    fn keeps(&self, n: NodeId) -> bool {
        self.slice.keeps(n)
    }

    fn node_text(&self, n: NodeId) -> &str {
        match self.cfg.nodes[n].range {
            Some(r) => &self.src[r.start..r.end],
            None => &self.cfg.nodes[n].label,
        }
    }

    fn is_comment_line(&self, line: &str) -> bool {
        let t = line.trim();
        let prefix = self.adapter.line_comment();
        let body = if let Some(b) = t.strip_prefix(prefix) {
            b
        } else if t.starts_with("/*") && t.ends_with("*/") && self.lang != Language::Python {
            &t[2..t.len() - 2]
        } else {
            return false;
        };
        let b = body.trim_start();
        // Annotation markers are never treated as attached comments.
        !(b.starts_with("PRE") || b.starts_with("POST"))
    }

    /// Range to delete for a statement: whole lines when it stands alone,
    /// including full-line comments directly above it.
    fn deletion_extent(&self, start: usize, end: usize) -> (usize, usize) {
        let src = self.src;
        let line_start = src[..start].rfind('\n').map_or(0, |i| i + 1);
        let line_end = src[end..].find('\n').map_or(src.len(), |i| end + i);
        let rest = src[end..line_end].trim();
        let rest_is_free = rest.is_empty() || self.is_comment_line(rest);
        if !at_line_start(src, start) {
            let trailing = src[end..].len() - src[end..].trim_start_matches([' ', '\t']).len();
            return (start, if rest_is_free { end } else { end + trailing });
        }
        if !rest_is_free {
            let trailing = src[end..].len() - src[end..].trim_start_matches([' ', '\t']).len();
            return (start, end + trailing);
        }
        let mut s = line_start;
        while s > 0 {
            let prev_start = src[..s - 1].rfind('\n').map_or(0, |i| i + 1);
            if !self.is_comment_line(&src[prev_start..s - 1]) {
                break;
            }
            s = prev_start;
        }
        let e = if line_end < src.len() { line_end + 1 } else { line_end };
        (s, e)
    }

    fn delete(&self, start: usize, end: usize, map: &mut RangeMap) -> Result<(), RangeConflict> {
        let (s, e) = self.deletion_extent(start, end);
        map.insert(s, e, Directive::Delete)
    }

    fn tree_range(&self, t: &TNode) -> Option<Range> {
        match t {
            TNode::Stmt(n) => self.cfg.nodes[*n].range,
            TNode::Unreachable { ranges, .. } => ranges.first().copied(),
            TNode::Guard { range, .. } | TNode::If { range, .. } | TNode::Loop { range, .. } | TNode::Seq { range, .. } => Some(*range),
        }
    }

    fn marker_count(&self, t: &TNode) -> usize {
        let mut n = 0;
        t.visit(&mut |x| {
            if let TNode::Unreachable { ranges, .. } = x {
                n += usize::from(!ranges.is_empty());
            }
        });
        n
    }

    fn is_elif(&self, t: &TNode) -> bool {
        self.lang == Language::Python && self.tree_range(t).is_some_and(|r| self.src[r.start..r.end].starts_with("elif"))
    }

    /// Renders `t` in place. Returns whether any text remains; fillers that
    /// only keep the syntax valid do not count.
    fn emit(&self, t: &TNode, map: &mut RangeMap) -> Result<bool, RenderError> {
        match t {
            TNode::Stmt(n) => {
                if self.keeps(*n) {
                    return Ok(true);
                }
                if let Some(r) = self.cfg.nodes[*n].range {
                    self.delete(r.start, r.end, map)?;
                }
                Ok(false)
            }
            TNode::Unreachable { ranges, .. } => {
                let Some((first, rest)) = ranges.split_first() else { return Ok(false) };
                map.insert(first.start, first.end, Directive::Replace(self.adapter.unreachable_text()))?;
                for r in rest {
                    self.delete(r.start, r.end, map)?;
                }
                Ok(true)
            }
            TNode::Guard { range, .. } => match self.text_of(t)? {
                Some(lines) => {
                    let ind = line_indent(self.src, range.start).to_string();
                    map.insert(range.start, range.end, Directive::Replace(join(&lines, &ind)))?;
                    Ok(true)
                }
                None => {
                    self.delete(range.start, range.end, map)?;
                    Ok(false)
                }
            },
            TNode::If { cond, range, then_branch, else_branch } => {
                let mut inner = RangeMap::new();
                let mut visible = self.keeps(*cond);
                let Some(region) = self.region_of(*cond) else { return Ok(false) };
                let crate::cfg::Region::If { then_branch: rt, else_branch: re, .. } = region else { unreachable!() };
                visible |= self.emit_branch(rt, then_branch, &mut inner)?;
                if let (Some(re), Some(te)) = (re, else_branch) {
                    visible |= self.emit_else(re, te, &mut inner)?;
                }
                if visible {
                    map.merge(inner)?;
                } else {
                    self.delete(range.start, range.end, map)?;
                }
                Ok(visible)
            }
            TNode::Loop { range, init, cond, update, body, .. } => {
                let mut inner = RangeMap::new();
                let Some(crate::cfg::Region::Loop { body: rb, .. }) = self.region_of(*cond) else { return Ok(false) };
                let mut visible = self.keeps(*cond);
                visible |= self.emit_branch(rb, body, &mut inner)?;
                if !visible {
                    self.delete(range.start, range.end, map)?;
                    return Ok(false);
                }
                for &c in init.iter().chain(update.iter()) {
                    if let (false, Some(r)) = (self.keeps(c), self.cfg.nodes[c].range) {
                        inner.insert(r.start, r.end, Directive::Delete)?;
                    }
                }
                map.merge(inner)?;
                Ok(true)
            }
            TNode::Seq { items, .. } => {
                let mut any = false;
                for i in items {
                    any |= self.emit(i, map)?;
                }
                Ok(any)
            }
        }
    }

    fn region_of(&self, cond: NodeId) -> Option<&crate::cfg::Region> {
        fn find(r: &crate::cfg::Region, cond: NodeId) -> Option<&crate::cfg::Region> {
            use crate::cfg::Region;
            match r {
                Region::Stmt(_) => None,
                Region::Seq { items, .. } => items.iter().find_map(|i| find(i, cond)),
                Region::If { cond: c, then_branch, else_branch, .. } => {
                    if *c == cond {
                        return Some(r);
                    }
                    find(then_branch, cond).or_else(|| else_branch.as_ref().and_then(|e| find(e, cond)))
                }
                Region::Loop { cond: c, body, .. } => {
                    if *c == cond {
                        return Some(r);
                    }
                    find(body, cond)
                }
            }
        }
        find(&self.cfg.region, cond)
    }

    fn braced(&self, r: Range) -> bool {
        let t = self.src[r.start..r.end].trim();
        t.starts_with('{') && t.ends_with('}')
    }

    /// Renders the body of a branch or loop, filling it when the language
    /// rejects an empty block.
    fn emit_branch(&self, region: &crate::cfg::Region, t: &TNode, map: &mut RangeMap) -> Result<bool, RenderError> {
        if !matches!(region, crate::cfg::Region::Seq { .. }) {
            return self.emit(t, map);
        }
        self.emit_block(region, t, map, false)
    }

    fn emit_block(&self, region: &crate::cfg::Region, t: &TNode, map: &mut RangeMap, top: bool) -> Result<bool, RenderError> {
        let range = match region {
            crate::cfg::Region::Seq { range, .. } => *range,
            _ => return self.emit(t, map),
        };
        let unbraced_c = self.lang == Language::C && !top && !self.braced(range);
        if unbraced_c {
            if let TNode::Seq { items, .. } = t {
                if let [g @ TNode::Guard { .. }] = items.as_slice() {
                    return match self.text_of(g)? {
                        Some(lines) if lines.len() > 1 => {
                            let ind = line_indent(self.src, range.start);
                            let mut text = String::from("{");
                            for l in &lines {
                                text.push('\n');
                                if !l.is_empty() {
                                    text.push_str(&format!("{ind}  {l}"));
                                }
                            }
                            text.push_str(&format!("\n{ind}}}"));
                            map.insert(range.start, range.end, Directive::Replace(text))?;
                            Ok(true)
                        }
                        Some(lines) => {
                            map.insert(range.start, range.end, Directive::Replace(lines.join("")))?;
                            Ok(true)
                        }
                        None => {
                            map.insert(range.start, range.end, Directive::Replace(";".into()))?;
                            Ok(false)
                        }
                    };
                }
            }
        }
        let mut inner = RangeMap::new();
        let visible = self.emit(t, &mut inner)?;
        if visible || range.is_empty() {
            map.merge(inner)?;
            return Ok(visible);
        }
        let filler = if unbraced_c {
            Some(";")
        } else if top && self.cfg.function.is_none() {
            None
        } else {
            self.adapter.empty_block_filler()
        };
        match filler {
            Some(f) if !self.braced(range) => {
                map.insert(range.start, range.end, Directive::Replace(f.to_string()))?;
                Ok(false)
            }
            _ => {
                map.merge(inner)?;
                Ok(false)
            }
        }
    }

    /// Else branch. A Python `elif` that does not survive as an `if` is
    /// rewritten under an explicit `else:`.
    fn emit_else(&self, region: &crate::cfg::Region, t: &TNode, map: &mut RangeMap) -> Result<bool, RenderError> {
        let item = match t {
            TNode::Seq { items, .. } if items.len() == 1 => &items[0],
            _ => return self.emit_branch(region, t, map),
        };
        if !self.is_elif(item) || matches!(item, TNode::If { .. }) {
            return self.emit_branch(region, t, map);
        }
        let range = self.tree_range(item).expect("elif has a range");
        match self.text_of(item)? {
            Some(lines) => {
                let ind = line_indent(self.src, range.start).to_string();
                let unit = self.indent_unit(range);
                let body = join(&lines, &format!("{ind}{unit}"));
                map.insert(range.start, range.end, Directive::Replace(format!("else:\n{ind}{unit}{body}")))?;
                Ok(true)
            }
            None => {
                self.delete(range.start, range.end, map)?;
                Ok(false)
            }
        }
    }

    /// Indentation step used inside `range`, from its second line.
    fn indent_unit(&self, range: Range) -> String {
        let outer = line_indent(self.src, range.start).len();
        self.src[range.start..range.end]
            .lines()
            .skip(1)
            .map(|l| l.len() - l.trim_start_matches([' ', '\t']).len())
            .find(|&w| w > outer)
            .map_or_else(|| "    ".to_string(), |w| " ".repeat(w - outer))
    }

    /// Renders `t` as free-standing lines with its own indentation removed,
    /// or `None` when nothing remains.
    fn text_of(&self, t: &TNode) -> Result<Option<Vec<String>>, RenderError> {
        match t {
            TNode::Guard { pre, cond, positive, body, .. } => {
                let mut lines = Vec::new();
                for &p in pre.iter().filter(|p| self.keeps(**p)) {
                    let text = self.node_text(p).trim();
                    lines.push(if self.lang == Language::C && !text.ends_with(';') { format!("{text};") } else { text.to_string() });
                }
                if self.keeps(*cond) {
                    lines.push(self.adapter.assume_text(self.node_text(*cond).trim(), *positive));
                }
                if let Some(b) = self.text_of(body)? {
                    lines.extend(b);
                }
                Ok((!lines.is_empty()).then_some(lines))
            }
            TNode::Unreachable { ranges, .. } => {
                Ok((!ranges.is_empty()).then(|| vec![self.adapter.unreachable_text()]))
            }
            TNode::Seq { items, .. } => {
                let mut lines = Vec::new();
                for i in items {
                    if let Some(l) = self.text_of(i)? {
                        lines.extend(l);
                    }
                }
                Ok((!lines.is_empty()).then_some(lines))
            }
            TNode::Stmt(_) | TNode::If { .. } | TNode::Loop { .. } => {
                let Some(r) = self.tree_range(t) else { return Ok(None) };
                let mut map = RangeMap::new();
                if !self.emit(t, &mut map)? {
                    return Ok(None);
                }
                if self.is_elif(t) {
                    map.insert(r.start, r.start + 4, Directive::Replace("if".into()))?;
                }
                let text = map.apply(self.src, r.start, r.end);
                let base = line_indent(self.src, r.start).len();
                let mut lines: Vec<String> = Vec::new();
                for (k, l) in text.split('\n').enumerate() {
                    if k == 0 {
                        lines.push(l.to_string());
                    } else {
                        let strip = (l.len() - l.trim_start_matches([' ', '\t']).len()).min(base);
                        lines.push(l[strip..].trim_end().to_string());
                    }
                }
                while lines.last().is_some_and(|l| l.trim().is_empty()) {
                    lines.pop();
                }
                Ok((!lines.is_empty()).then_some(lines))
            }
        }
    }
}

/// First line as is, later lines prefixed by `indent`; blank lines stay
/// blank.
fn join(lines: &[String], indent: &str) -> String {
    let mut out = String::new();
    for (k, l) in lines.iter().enumerate() {
        if k > 0 {
            out.push('\n');
            if !l.is_empty() {
                out.push_str(indent);
            }
        }
        out.push_str(l);
    }
    out
}
