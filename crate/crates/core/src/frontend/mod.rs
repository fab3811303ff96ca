// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Language-agnostic syntax trees. Each adapter turns source text into a tree
//! of [`UnifiedNode`]s that only records a syntactic category, a byte range
//! and children; everything downstream works on that shape alone.

mod annotations;
mod c;
mod mini;
mod python;
pub mod scan;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use annotations::{extract_annotations, AnnotationError, Annotations, Marker, MarkerKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    FunctionDef,
    If,
    While,
    For,
    Assignment,
    Call,
    Return,
    Assume,
    Block,
    ConditionExpr,
    Declaration,
    Comment,
    Other,
}

impl NodeKind {
    pub fn is_control(self) -> bool {
        matches!(self, NodeKind::If | NodeKind::While | NodeKind::For)
    }
}

/// Distinguishes the clauses of a `for` header, which share a kind with
/// ordinary statements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    #[default]
    Plain,
    ForInit,
    ForUpdate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Range {
    pub file_id: u32,
    pub start: usize,
    pub end: usize,
}

impl Range {
    pub fn new(file_id: u32, start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Range { file_id, start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Range) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Range) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}..{}", self.file_id, self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnifiedNode {
    pub kind: NodeKind,
    pub range: Range,
    pub children: Vec<UnifiedNode>,
    pub name_hint: Option<String>,
    #[serde(default, skip_serializing_if = "is_plain")]
    pub role: Role,
}

fn is_plain(r: &Role) -> bool {
    *r == Role::Plain
}

impl UnifiedNode {
    pub fn new(kind: NodeKind, range: Range) -> Self {
        UnifiedNode { kind, range, children: Vec::new(), name_hint: None, role: Role::Plain }
    }

    pub fn with_children(mut self, children: Vec<UnifiedNode>) -> Self {
        self.children = children;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name_hint = Some(name.into());
        self
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.range.start..self.range.end]
    }

    pub fn child(&self, kind: NodeKind) -> Option<&UnifiedNode> {
        self.children.iter().find(|c| c.kind == kind)
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a UnifiedNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn count(&self, pred: impl Fn(&UnifiedNode) -> bool) -> usize {
        let mut n = 0;
        self.walk(&mut |node| {
            if pred(node) {
                n += 1
            }
        });
        n
    }

    /// Checks range containment and sibling ordering for the whole subtree.
    pub fn check_ranges(&self) -> Result<(), String> {
        let mut prev_end = self.range.start;
        for c in &self.children {
            if !self.range.contains(&c.range) {
                return Err(format!("{:?} {} escapes parent {:?} {}", c.kind, c.range, self.kind, self.range));
            }
            if c.range.start < prev_end {
                return Err(format!("{:?} {} overlaps its previous sibling", c.kind, c.range));
            }
            prev_end = c.range.end;
            c.check_ranges()?;
        }
        Ok(())
    }

    /// Statements of a branch or loop body: a block's children without comments,
    /// or the node itself for an unbraced body.
    pub fn body_stmts(&self) -> Vec<&UnifiedNode> {
        if self.kind == NodeKind::Block {
            self.children.iter().filter(|c| c.kind != NodeKind::Comment).collect()
        } else {
            vec![self]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Mini,
    Python,
    C,
}

impl Language {
    pub fn tag(self) -> &'static str {
        match self {
            Language::Mini => "mini",
            Language::Python => "python",
            Language::C => "c",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self, FrontendError> {
        match tag.to_ascii_lowercase().as_str() {
            "mini" => Ok(Language::Mini),
            "python" | "py" => Ok(Language::Python),
            "c" => Ok(Language::C),
            other => Err(FrontendError::UnknownLanguage(other.to_string())),
        }
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, FrontendError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mini") => Ok(Language::Mini),
            Some("py") => Ok(Language::Python),
            Some("c" | "h") => Ok(Language::C),
            other => Err(FrontendError::UnknownLanguage(format!("extension {:?}", other.unwrap_or("")))),
        }
    }

    /// Tag for fenced code blocks in prompts.
    pub fn fence(self) -> &'static str {
        match self {
            Language::Mini => "",
            Language::Python => "python",
            Language::C => "c",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FrontendError {
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("unreadable input: {0}")]
    Unreadable(String),
}

/// Identifiers written and read by one statement or condition. `opaque`
/// marks nodes whose effects could not be determined.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefUse {
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub opaque: bool,
}

/// Pseudo-variables threading the input and output streams through the
/// dependency analysis, so that slices never reorder reads or writes.
pub const INPUT_STREAM: &str = "$in";
pub const OUTPUT_STREAM: &str = "$out";

pub trait GrammarAdapter: Send + Sync {
    fn language(&self) -> Language;

    /// Parses and unifies `src`. Unrecognized regions become `Other` nodes.
    fn parse(&self, src: &str, file_id: u32) -> UnifiedNode;

    fn def_use(&self, node: &UnifiedNode, src: &str) -> DefUse;

    /// Source text of `assume(cond)` or `assume(!cond)`.
    fn assume_text(&self, cond: &str, positive: bool) -> String;

    /// Source text of an unreachable marker.
    fn unreachable_text(&self) -> String;

    /// Statement to place in a block that lost all its statements, if the
    /// language forbids empty blocks.
    fn empty_block_filler(&self) -> Option<&'static str> {
        None
    }

    /// Line-comment prefix.
    fn line_comment(&self) -> &'static str;

    fn is_reentrant(&self) -> bool {
        true
    }
}

#[derive(Clone)]
pub struct AdapterRegistry {
    adapters: BTreeMap<Language, Arc<dyn GrammarAdapter>>,
}

impl Default for AdapterRegistry {
    fn default() -> Self {
        let mut reg = AdapterRegistry::empty();
        reg.register(Arc::new(mini::MiniAdapter));
        reg.register(Arc::new(python::PythonAdapter));
        reg.register(Arc::new(c::CAdapter));
        reg
    }
}

impl AdapterRegistry {
    pub fn empty() -> Self {
        AdapterRegistry { adapters: BTreeMap::new() }
    }

    pub fn register(&mut self, adapter: Arc<dyn GrammarAdapter>) {
        self.adapters.insert(adapter.language(), adapter);
    }

    pub fn get(&self, lang: Language) -> Result<Arc<dyn GrammarAdapter>, FrontendError> {
        self.adapters.get(&lang).cloned().ok_or_else(|| FrontendError::UnknownLanguage(lang.tag().to_string()))
    }

    pub fn languages(&self) -> Vec<Language> {
        self.adapters.keys().copied().collect()
    }
}

pub struct SourceUnit {
    pub file_id: u32,
    pub text: String,
    pub language: Language,
    pub root: UnifiedNode,
    pub symbol_index: BTreeMap<String, Vec<UnifiedNode>>,
    pub adapter: Arc<dyn GrammarAdapter>,
}

impl fmt::Debug for SourceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceUnit")
            .field("file_id", &self.file_id)
            .field("language", &self.language)
            .field("bytes", &self.text.len())
            .finish()
    }
}

impl SourceUnit {
    pub fn def_use(&self, node: &UnifiedNode) -> DefUse {
        self.adapter.def_use(node, &self.text)
    }

    pub fn node_text(&self, node: &UnifiedNode) -> &str {
        node.text(&self.text)
    }

    /// Function definitions in source order.
    pub fn functions(&self) -> Vec<&UnifiedNode> {
        let mut out = Vec::new();
        self.root.walk(&mut |n| {
            if n.kind == NodeKind::FunctionDef {
                out.push(n)
            }
        });
        out
    }

    /// True if any `Other` node without a name covers text that the
    /// adapter failed to recognize.
    pub fn error_nodes(&self) -> usize {
        self.root.count(|n| n.kind == NodeKind::Other && n.name_hint.is_none())
    }
}

pub fn parse_unit(bytes: &[u8], language: Language, file_id: u32) -> Result<SourceUnit, FrontendError> {
    parse_unit_with(&AdapterRegistry::default(), bytes, language, file_id)
}

pub fn parse_unit_with(
    registry: &AdapterRegistry,
    bytes: &[u8],
    language: Language,
    file_id: u32,
) -> Result<SourceUnit, FrontendError> {
    let adapter = registry.get(language)?;
    let text = std::str::from_utf8(bytes).map_err(|e| FrontendError::Unreadable(e.to_string()))?.to_string();
    let root = adapter.parse(&text, file_id);
    let mut symbol_index: BTreeMap<String, Vec<UnifiedNode>> = BTreeMap::new();
    root.walk(&mut |n| {
        if matches!(n.kind, NodeKind::Declaration | NodeKind::FunctionDef) {
            if let Some(name) = &n.name_hint {
                symbol_index.entry(name.clone()).or_default().push(n.clone());
            }
        }
    });
    Ok(SourceUnit { file_id, text, language, root, symbol_index, adapter })
}

/// Inserts comment nodes into the innermost block that contains them without
/// overlapping a statement. Comments inside statements are dropped.
pub(crate) fn attach_comments(root: &mut UnifiedNode, comments: Vec<UnifiedNode>) {
    for c in comments {
        if root.range.contains(&c.range) {
            attach_one(root, c);
        }
    }
}

fn attach_one(node: &mut UnifiedNode, comment: UnifiedNode) {
    for child in node.children.iter_mut() {
        if child.kind != NodeKind::Comment && child.range.contains(&comment.range) && !child.range.is_empty() {
            return attach_one(child, comment);
        }
        if child.range.overlaps(&comment.range) {
            return;
        }
    }
    if node.kind == NodeKind::Block && node.range.contains(&comment.range) {
        let pos = node.children.iter().position(|ch| ch.range.start >= comment.range.end).unwrap_or(node.children.len());
        node.children.insert(pos, comment);
    }
}
