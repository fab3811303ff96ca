// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! In-file pre/post markers: `assume c  # PRE`, `assert c  # POST`, or a
//! bare `// PRE: c` comment.

use super::scan::{self, TokKind};
use super::{Language, Range, SourceUnit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkerKind {
    Pre,
    Post,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marker {
    pub kind: MarkerKind,
    pub condition: String,
    /// The comment carrying the tag.
    pub comment: Range,
    /// The `assume`/`assert` statement on the same line, when present.
    pub statement: Option<Range>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Annotations {
    pub pre: Vec<Marker>,
    pub post: Option<Marker>,
}

impl Annotations {
    /// Conjunction of all pre markers, or `None` when there are none.
    pub fn pre_condition(&self) -> Option<String> {
        match self.pre.len() {
            0 => None,
            1 => Some(self.pre[0].condition.clone()),
            _ => Some(self.pre.iter().map(|m| format!("({})", m.condition)).collect::<Vec<_>>().join(" and ")),
        }
    }

    pub fn post_condition(&self) -> Option<&str> {
        self.post.as_ref().map(|m| m.condition.as_str())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("conflicting POST markers: `{first}` and `{second}`")]
    ConflictingPost { first: String, second: String },
}

pub fn extract_annotations(unit: &SourceUnit) -> Result<Annotations, AnnotationError> {
    let src = unit.text.as_str();
    let lang = unit.language;
    let mut out = Annotations::default();
    for tok in scan::lex(src, lang) {
        if tok.kind != TokKind::Comment {
            continue;
        }
        let Some(body) = comment_body(tok.text(src), lang) else { continue };
        let body = body.trim();
        let (kind, rest) = if let Some(r) = tag(body, "PRE") {
            (MarkerKind::Pre, r)
        } else if let Some(r) = tag(body, "POST") {
            (MarkerKind::Post, r)
        } else {
            continue;
        };
        let comment = Range::new(unit.file_id, tok.start, tok.end);
        let line_start = src[..tok.start].rfind('\n').map_or(0, |i| i + 1);
        let code = &src[line_start..tok.start];
        let lead = code.len() - code.trim_start().len();
        let code_trim = code.trim();
        let keyword = if kind == MarkerKind::Pre { "assume" } else { "assert" };
        let (condition, statement) = match statement_condition(code_trim, keyword) {
            Some(c) => {
                let s = line_start + lead;
                (c, Some(Range::new(unit.file_id, s, s + code_trim.len())))
            }
            None if !rest.is_empty() => (rest.to_string(), None),
            None => continue,
        };
        let marker = Marker { kind, condition, comment, statement };
        match kind {
            MarkerKind::Pre => out.pre.push(marker),
            MarkerKind::Post => match &out.post {
                Some(prev) if normalize(&prev.condition) != normalize(&marker.condition) => {
                    return Err(AnnotationError::ConflictingPost {
                        first: prev.condition.clone(),
                        second: marker.condition,
                    });
                }
                Some(_) => {}
                None => out.post = Some(marker),
            },
        }
    }
    Ok(out)
}

fn comment_body(text: &str, lang: Language) -> Option<&str> {
    match lang {
        Language::Python => text.strip_prefix('#'),
        Language::C | Language::Mini => text
            .strip_prefix("//")
            .or_else(|| text.strip_prefix("/*").map(|t| t.strip_suffix("*/").unwrap_or(t))),
    }
}

/// `PRE`, `PRE:` or `PRE: cond` → the remainder after the tag.
fn tag<'a>(body: &'a str, word: &str) -> Option<&'a str> {
    let rest = body.strip_prefix(word)?;
    if rest.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_') {
        return None;
    }
    Some(rest.trim_start().strip_prefix(':').unwrap_or(rest).trim())
}

fn statement_condition(code: &str, keyword: &str) -> Option<String> {
    let rest = code.strip_prefix(keyword)?;
    if rest.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_') {
        return None;
    }
    let rest = rest.trim().trim_end_matches(';').trim_end();
    let inner = strip_outer_parens(rest);
    (!inner.is_empty()).then(|| inner.to_string())
}

/// Removes one pair of parentheses wrapping the whole text.
fn strip_outer_parens(text: &str) -> &str {
    let Some(inner) = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')) else { return text };
    let mut depth = 0i32;
    for c in inner.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return text;
                }
            }
            _ => {}
        }
    }
    inner.trim()
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect()
}
