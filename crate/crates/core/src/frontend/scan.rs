// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Token-level scanning shared by the Python and C adapters, plus the
//! syntactic def/use approximation they both rely on.

use std::collections::BTreeSet;

use super::{DefUse, Language};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Number,
    Str,
    Punct,
    Comment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanTok {
    pub kind: TokKind,
    pub start: usize,
    pub end: usize,
}

impl ScanTok {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "**=", "//=", "...", "->", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "<<", ">>", "**", "//", ":=",
];

const STRING_PREFIXES: &[&str] = &["r", "b", "f", "u", "rb", "br", "fr", "rf", "R", "B", "F", "U", "L"];

/// Lexes `src`. Unterminated strings and comments run to the end of input;
/// lexing never fails.
pub fn lex(src: &str, lang: Language) -> Vec<ScanTok> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        // Comments.
        if lang == Language::Python && c == b'#' {
            i = memchr_nl(b, i);
            out.push(ScanTok { kind: TokKind::Comment, start, end: i });
            continue;
        }
        if lang != Language::Python && c == b'/' && b.get(i + 1) == Some(&b'/') {
            i = memchr_nl(b, i);
            out.push(ScanTok { kind: TokKind::Comment, start, end: i });
            continue;
        }
        if lang != Language::Python && c == b'/' && b.get(i + 1) == Some(&b'*') {
            i = src[i + 2..].find("*/").map_or(b.len(), |k| i + 2 + k + 2);
            out.push(ScanTok { kind: TokKind::Comment, start, end: i });
            continue;
        }
        if lang == Language::C && c == b'#' {
            // Preprocessor lines are skipped as comments, continuation lines included.
            while i < b.len() && b[i] != b'\n' {
                if b[i] == b'\\' && b.get(i + 1) == Some(&b'\n') {
                    i += 1;
                }
                i += 1;
            }
            out.push(ScanTok { kind: TokKind::Comment, start, end: i });
            continue;
        }
        if c == b'"' || c == b'\'' {
            i = skip_string(src, i, lang);
            out.push(ScanTok { kind: TokKind::Str, start, end: i });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] >= 0x80) {
                i += 1;
            }
            if i < b.len() && (b[i] == b'"' || b[i] == b'\'') && STRING_PREFIXES.contains(&&src[start..i]) {
                i = skip_string(src, i, lang);
                out.push(ScanTok { kind: TokKind::Str, start, end: i });
            } else {
                out.push(ScanTok { kind: TokKind::Ident, start, end: i });
            }
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'.' || b[i] == b'_') {
                i += 1;
            }
            out.push(ScanTok { kind: TokKind::Number, start, end: i });
            continue;
        }
        let len = PUNCTS.iter().find(|p| src[i..].starts_with(**p)).map_or_else(|| src[i..].chars().next().map_or(1, char::len_utf8), |p| p.len());
        i += len;
        out.push(ScanTok { kind: TokKind::Punct, start, end: i });
    }
    out
}

fn memchr_nl(b: &[u8], from: usize) -> usize {
    b[from..].iter().position(|&c| c == b'\n').map_or(b.len(), |k| from + k)
}

/// Returns the end offset of the string literal starting at `i`.
pub fn skip_string(src: &str, i: usize, lang: Language) -> usize {
    let b = src.as_bytes();
    let q = b[i];
    if lang == Language::Python && b.get(i + 1) == Some(&q) && b.get(i + 2) == Some(&q) {
        let delim = if q == b'"' { "\"\"\"" } else { "'''" };
        return src[i + 3..].find(delim).map_or(b.len(), |k| i + 3 + k + 3);
    }
    let mut j = i + 1;
    while j < b.len() {
        match b[j] {
            b'\\' => j += 2,
            b'\n' => return j,
            c if c == q => return j + 1,
            _ => j += 1,
        }
    }
    b.len()
}

pub fn is_keyword(word: &str, lang: Language) -> bool {
    match lang {
        Language::Python => PY_KEYWORDS.contains(&word),
        Language::C => C_KEYWORDS.contains(&word),
        Language::Mini => crate::mini_lang::parser::RESERVED.contains(&word),
    }
}

const PY_KEYWORDS: &[&str] = &[
    "and", "as", "assert", "assume", "async", "await", "break", "class", "continue", "def", "del", "elif", "else", "except",
    "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise",
    "return", "try", "while", "with", "yield", "None", "True", "False",
];

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float",
    "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed", "sizeof",
    "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "bool", "true", "false",
    "NULL", "assume",
];

/// Identifier tokens of `text` that name variables or functions: keywords,
/// member names (`a.b`, `a->b`) and keyword-argument names are excluded.
pub fn identifiers(text: &str, lang: Language) -> Vec<(String, IdentRole)> {
    let toks: Vec<ScanTok> = lex(text, lang).into_iter().filter(|t| t.kind != TokKind::Comment).collect();
    classify(text, &toks, lang)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentRole {
    Plain,
    /// Directly followed by `(`.
    Called,
    /// Preceded by `.` or `->`.
    Member,
    /// A member directly followed by `(`.
    Method,
    /// Followed by `.` or `->`.
    Receiver,
}

impl IdentRole {
    pub fn is_member(self) -> bool {
        matches!(self, IdentRole::Member | IdentRole::Method)
    }
}

fn classify(src: &str, toks: &[ScanTok], lang: Language) -> Vec<(String, IdentRole)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    for (k, t) in toks.iter().enumerate() {
        let s = t.text(src);
        if t.kind == TokKind::Punct {
            match s {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                _ => {}
            }
            continue;
        }
        if t.kind != TokKind::Ident || is_keyword(s, lang) {
            continue;
        }
        let prev = k.checked_sub(1).map(|p| toks[p].text(src));
        let next = toks.get(k + 1).map(|n| n.text(src));
        let member = matches!(prev, Some("." | "->"));
        let role = if member && next == Some("(") {
            IdentRole::Method
        } else if member || (depth > 0 && lang == Language::Python && next == Some("=")) {
            IdentRole::Member
        } else if next == Some("(") {
            IdentRole::Called
        } else if matches!(next, Some("." | "->")) {
            IdentRole::Receiver
        } else {
            IdentRole::Plain
        };
        out.push((s.to_string(), role));
    }
    out
}

/// Name of the first identifier applied to arguments, members included.
pub fn first_call(text: &str, lang: Language) -> Option<String> {
    let toks: Vec<ScanTok> = lex(text, lang).into_iter().filter(|t| t.kind != TokKind::Comment).collect();
    toks.windows(2)
        .find(|w| w[0].kind == TokKind::Ident && !is_keyword(w[0].text(text), lang) && w[1].text(text) == "(")
        .map(|w| w[0].text(text).to_string())
}

/// Variable-like identifiers: everything except member names.
pub fn var_names(text: &str, lang: Language) -> BTreeSet<String> {
    identifiers(text, lang).into_iter().filter(|(_, r)| !r.is_member()).map(|(s, _)| s).collect()
}

const ASSIGN_OPS: &[&str] =
    &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", "**=", "//="];

/// Approximate def/use sets of one simple statement.
pub fn stmt_def_use(text: &str, lang: Language) -> DefUse {
    let toks: Vec<ScanTok> = lex(text, lang).into_iter().filter(|t| t.kind != TokKind::Comment).collect();
    let mut du = DefUse::default();
    let mut depth = 0i32;
    let mut assign_at = None;
    for (k, t) in toks.iter().enumerate() {
        let s = t.text(text);
        match s {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            _ if depth == 0 && t.kind == TokKind::Punct && ASSIGN_OPS.contains(&s) => {
                assign_at = Some(k);
                break;
            }
            _ => {}
        }
    }
    let all = classify(text, &toks, lang);
    for (name, role) in &all {
        if !role.is_member() {
            du.uses.insert(name.clone());
        }
    }
    if let Some(k) = assign_at {
        let op = toks[k].text(text);
        let mut lhs = &toks[..k];
        if lang == Language::Python {
            // Drop a type annotation: `x: int = ...`.
            if let Some(colon) = top_level_index(text, lhs, ":") {
                lhs = &lhs[..colon];
            }
        }
        let mut plain_targets = BTreeSet::new();
        for part in split_top_level(text, lhs, ",") {
            let roles = classify(text, part, lang);
            let depth0 = depth0_idents(text, part, lang);
            if let Some(target) = depth0.last() {
                du.defs.insert(target.clone());
                let simple = roles.len() == 1 || (lang == Language::C && !part.iter().any(|t| matches!(t.text(text), "[" | "." | "->")));
                if simple && op == "=" {
                    plain_targets.insert(target.clone());
                }
            }
        }
        // A plain overwrite does not read its target unless the right side does.
        let rhs_vars: BTreeSet<String> =
            classify(text, &toks[k + 1..], lang).into_iter().filter(|(_, r)| !r.is_member()).map(|(s, _)| s).collect();
        for t in plain_targets {
            if !rhs_vars.contains(&t) {
                du.uses.remove(&t);
            }
        }
        if lang == Language::C {
            c_out_args(text, &toks[k + 1..], &mut du);
        }
        return du;
    }
    // Increments, deletions and calls.
    for (k, t) in toks.iter().enumerate() {
        let s = t.text(text);
        if matches!(s, "++" | "--") {
            let neighbour = toks.get(k + 1).filter(|n| n.kind == TokKind::Ident).or_else(|| k.checked_sub(1).map(|p| &toks[p]));
            if let Some(n) = neighbour.filter(|n| n.kind == TokKind::Ident) {
                du.defs.insert(n.text(text).to_string());
            }
        }
    }
    if lang == Language::Python && toks.first().map(|t| t.text(text)) == Some("del") {
        du.defs.extend(depth0_idents(text, &toks[1..], lang));
    }
    for (name, role) in &all {
        if *role == IdentRole::Receiver {
            du.defs.insert(name.clone());
        }
    }
    if lang == Language::C {
        c_out_args(text, &toks, &mut du);
    }
    du
}

/// Names bound by a C declaration without initializer (`int a, *b[3];`).
pub fn declared_names(text: &str, lang: Language) -> Vec<String> {
    let toks: Vec<ScanTok> = lex(text, lang).into_iter().filter(|t| t.kind != TokKind::Comment).collect();
    let mut out = Vec::new();
    for part in split_top_level(text, &toks, ",") {
        if let Some(name) = depth0_idents(text, part, lang).last() {
            out.push(name.clone());
        }
    }
    out
}

/// Arguments passed as a bare name or by address may be written by the callee.
fn c_out_args(text: &str, toks: &[ScanTok], du: &mut DefUse) {
    let mut depth = 0i32;
    for (k, t) in toks.iter().enumerate() {
        match t.text(text) {
            "(" => depth += 1,
            ")" => depth -= 1,
            _ => {}
        }
        if depth > 0 && k > 0 && t.kind == TokKind::Ident && !is_keyword(t.text(text), Language::C) {
            let prev = toks[k - 1].text(text);
            let prev_ok = matches!(prev, "(" | ",") || (prev == "&" && k >= 2 && matches!(toks[k - 2].text(text), "(" | ","));
            let next_ok = toks.get(k + 1).is_some_and(|n| matches!(n.text(text), ")" | ","));
            if prev_ok && next_ok {
                du.defs.insert(t.text(text).to_string());
            }
        }
    }
}

/// Def/use of a C declaration, with or without initializers
/// (`char a[N] = {0}, *b = f(x);`). Type names count as uses.
pub fn c_declaration_def_use(text: &str) -> DefUse {
    let lang = Language::C;
    let toks: Vec<ScanTok> = lex(text, lang).into_iter().filter(|t| t.kind != TokKind::Comment).collect();
    let mut du = DefUse::default();
    for part in split_top_level(text, &toks, ",") {
        let (lhs, rhs) = match top_level_index(text, part, "=") {
            Some(k) => (&part[..k], &part[k + 1..]),
            None => (part, &part[part.len()..]),
        };
        let names = depth0_idents(text, lhs, lang);
        let name = names.last().cloned();
        for (n, role) in classify(text, lhs, lang).into_iter().chain(classify(text, rhs, lang)) {
            if !role.is_member() && Some(&n) != name.as_ref() {
                du.uses.insert(n);
            }
        }
        du.defs.extend(name);
    }
    du
}

fn depth0_idents(src: &str, toks: &[ScanTok], lang: Language) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    for (k, t) in toks.iter().enumerate() {
        let s = t.text(src);
        match s {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            _ => {}
        }
        if depth == 0 && t.kind == TokKind::Ident && !is_keyword(s, lang) {
            let prev = k.checked_sub(1).map(|p| toks[p].text(src));
            if !matches!(prev, Some("." | "->")) {
                out.push(s.to_string());
            }
        }
    }
    out
}

fn top_level_index(src: &str, toks: &[ScanTok], punct: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (k, t) in toks.iter().enumerate() {
        match t.text(src) {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            s if depth == 0 && s == punct => return Some(k),
            _ => {}
        }
    }
    None
}

fn split_top_level<'t>(src: &str, toks: &'t [ScanTok], punct: &str) -> Vec<&'t [ScanTok]> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut from = 0;
    for (k, t) in toks.iter().enumerate() {
        match t.text(src) {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            s if depth == 0 && s == punct => {
                parts.push(&toks[from..k]);
                from = k + 1;
            }
            _ => {}
        }
    }
    parts.push(&toks[from..]);
    parts
}

/// Splits a Python `for` header `target in iterable` into its two halves.
pub fn split_for_header(text: &str) -> Option<(usize, usize)> {
    let toks = lex(text, Language::Python);
    let k = top_level_index(text, &toks, "in")?;
    Some((toks[k].start, toks[k].end))
}

/// The comparison operator of a condition made of exactly one top-level
/// comparison and no boolean connectives, with its negated spelling.
pub fn single_comparison(text: &str, lang: Language) -> Option<(usize, usize, &'static str)> {
    let toks: Vec<ScanTok> = lex(text, lang).into_iter().filter(|t| t.kind != TokKind::Comment).collect();
    let mut depth = 0i32;
    let mut found = None;
    for t in &toks {
        let s = t.text(text);
        match s {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            "and" | "or" | "not" | "&&" | "||" | "!" | "?" | "if" | "lambda" | "is" | "in" | "," => return None,
            "==" | "!=" | "<" | "<=" | ">" | ">=" if depth == 0 => {
                if found.is_some() {
                    return None;
                }
                let neg = match s {
                    "==" => "!=",
                    "!=" => "==",
                    "<" => ">=",
                    "<=" => ">",
                    ">" => "<=",
                    _ => "<",
                };
                found = Some((t.start, t.end, neg));
            }
            _ => {}
        }
    }
    found
}
