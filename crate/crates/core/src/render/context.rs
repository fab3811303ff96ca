// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Declarations outside the analysed function that the slice refers to by
//! name.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::cfg::Cfg;
use crate::frontend::scan::{self, TokKind};
use crate::frontend::{Language, NodeKind, Range, SourceUnit, UnifiedNode};
use crate::slice::SliceProgram;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContextItem {
    pub name: String,
    pub range: Range,
    /// Only the signature was included because the body exceeded the line
    /// cap.
    pub truncated: bool,
    #[serde(skip)]
    pub text: String,
}

/// Identifiers appearing in the kept statements and assumptions.
pub fn slice_identifiers(slice: &SliceProgram, cfg: &Cfg, unit: &SourceUnit) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for &n in &slice.kept {
        let Some(r) = cfg.nodes[n].range else { continue };
        let text = &unit.text[r.start..r.end];
        for t in scan::lex(text, unit.language) {
            if t.kind == TokKind::Ident {
                out.insert(text[t.start..t.end].to_string());
            }
        }
    }
    out
}

/// Matching declarations outside the function, in source order. Names are
/// matched textually, which may include unrelated declarations sharing a
/// name.
pub fn gather_context(slice: &SliceProgram, cfg: &Cfg, unit: &SourceUnit, line_cap: usize) -> Vec<ContextItem> {
    let mut seen = BTreeSet::new();
    let mut items = Vec::new();
    for name in slice_identifiers(slice, cfg, unit) {
        let Some(decls) = unit.symbol_index.get(&name) else { continue };
        for d in decls {
            let r = d.range;
            if cfg.scope.contains(&r) || r.contains(&cfg.scope) || !seen.insert((r.start, r.end)) {
                continue;
            }
            let (text, truncated) = declaration_text(d, unit, line_cap);
            items.push(ContextItem { name: name.clone(), range: r, truncated, text });
        }
    }
    items.sort_by_key(|i| (i.range.start, i.range.end));
    items
}

fn declaration_text(d: &UnifiedNode, unit: &SourceUnit, line_cap: usize) -> (String, bool) {
    let full = d.text(&unit.text);
    let body = d.children.iter().find(|c| c.kind == NodeKind::Block);
    if full.lines().count() <= line_cap || d.kind != NodeKind::FunctionDef {
        return (full.to_string(), false);
    }
    let Some(body) = body else { return (full.to_string(), false) };
    let head = unit.text[d.range.start..body.range.start].trim_end();
    let stub = match unit.language {
        Language::Python => format!("{head}\n    ..."),
        Language::C | Language::Mini => format!("{head};"),
    };
    (stub, true)
}
