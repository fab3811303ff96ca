// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::Serialize;

use crate::cfg::Cfg;
use crate::frontend::scan::{identifiers, IdentRole};
use crate::frontend::{SourceUnit, INPUT_STREAM, OUTPUT_STREAM};
use crate::oracle::HoareSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionSource {
    /// Listed explicitly alongside the post-condition.
    Explicit,
    /// Identifiers of a post-condition written as code.
    Code,
    /// Prose words matched against program names.
    Prose,
    /// Nothing matched; every assigned variable is used instead.
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionInfo {
    pub vars: BTreeSet<String>,
    /// Member names mentioned by the post-condition (`key` in `db->key`).
    pub fields: BTreeSet<String>,
    pub source: CriterionSource,
}

/// Characters that only appear in a post-condition written as code.
const CODE_CHARS: &[char] = &['=', '<', '>', '!', '(', ')', '[', ']', '+', '-', '*', '/', '%', '&', '|', '^', '~', '.'];

fn looks_like_code(text: &str) -> bool {
    text.contains(CODE_CHARS) || text.split_whitespace().count() == 1
}

fn program_vars(cfg: &Cfg) -> BTreeSet<String> {
    cfg.nodes.iter().flat_map(|n| n.defs.iter().chain(&n.uses)).filter(|v| !is_stream(v)).cloned().collect()
}

fn is_stream(v: &str) -> bool {
    v == INPUT_STREAM || v == OUTPUT_STREAM
}

/// A prose word names `name` when it is the name or, for names of three or
/// more characters, starts with it ("output" for `out`).
fn word_matches(word: &str, name: &str) -> bool {
    word == name || (name.len() >= 3 && word.len() > name.len() && word.starts_with(name))
}

pub fn derive_criterion(spec: &HoareSpec, unit: &SourceUnit, cfg: &Cfg) -> CriterionInfo {
    let known: BTreeSet<String> = program_vars(cfg).into_iter().chain(unit.symbol_index.keys().cloned()).collect();
    let mut fields = BTreeSet::new();
    let (vars, source) = if let Some(explicit) = &spec.post_vars {
        (explicit.iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect(), CriterionSource::Explicit)
    } else if looks_like_code(&spec.post) {
        let mut vars = BTreeSet::new();
        for (name, role) in identifiers(&spec.post, unit.language) {
            match role {
                IdentRole::Member => {
                    fields.insert(name);
                }
                IdentRole::Called | IdentRole::Method => {}
                IdentRole::Plain | IdentRole::Receiver => {
                    if known.contains(&name) {
                        vars.insert(name);
                    }
                }
            }
        }
        (vars, CriterionSource::Code)
    } else {
        let words: Vec<String> = spec
            .post
            .split(|c: char| !(c.is_alphanumeric() || c == '_'))
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect();
        let vars = known.iter().filter(|name| words.iter().any(|w| word_matches(w, name))).cloned().collect();
        (vars, CriterionSource::Prose)
    };
    if vars.is_empty() {
        let assigned: BTreeSet<String> = cfg.nodes.iter().flat_map(|n| n.defs.iter()).filter(|v| !is_stream(v)).cloned().collect();
        log::warn!("post-condition `{}` names no program variable; slicing on all {} assigned variables", spec.post, assigned.len());
        return CriterionInfo { vars: assigned, fields, source: CriterionSource::Fallback };
    }
    CriterionInfo { vars, fields, source }
}
