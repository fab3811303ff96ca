// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Best-effort C adapter driven by tokens and brace matching. No
//! preprocessing: directives are kept as opaque top-level nodes.

use super::scan::{self, ScanTok, TokKind};
use super::{DefUse, GrammarAdapter, Language, NodeKind, Range, Role, UnifiedNode};

pub struct CAdapter;

const LANG: Language = Language::C;

const TYPE_WORDS: &[&str] = &[
    "int", "char", "void", "short", "long", "float", "double", "unsigned", "signed", "struct", "union", "enum", "const",
    "static", "extern", "volatile", "register", "bool", "size_t", "ssize_t", "auto", "inline", "typedef",
];

impl GrammarAdapter for CAdapter {
    fn language(&self) -> Language {
        LANG
    }

    fn parse(&self, src: &str, file_id: u32) -> UnifiedNode {
        let toks = scan::lex(src, LANG);
        let mut p = Parser { src, toks, pos: 0, file_id };
        let children = p.top_level();
        UnifiedNode::new(NodeKind::Block, Range::new(file_id, 0, src.len())).with_children(children)
    }

    fn def_use(&self, node: &UnifiedNode, src: &str) -> DefUse {
        let text = node.text(src);
        match node.kind {
            NodeKind::ConditionExpr => DefUse { uses: scan::var_names(text, LANG), ..DefUse::default() },
            NodeKind::Declaration if text.starts_with('#') => {
                let mut du = DefUse::default();
                du.defs.extend(node.name_hint.clone());
                du
            }
            NodeKind::Declaration if node.children.is_empty() && !text.contains('{') => {
                scan::c_declaration_def_use(text.trim_end_matches(';'))
            }
            NodeKind::Declaration => {
                let mut du = DefUse::default();
                du.defs.extend(node.name_hint.clone());
                du
            }
            // Declarations with initializers carry the first declared name.
            NodeKind::Assignment if node.name_hint.is_some() => scan::c_declaration_def_use(text.trim_end_matches(';')),
            NodeKind::Other => {
                let opaque = !matches!(node.name_hint.as_deref(), Some("break" | "continue" | "expr" | "empty"));
                DefUse { opaque, ..scan::stmt_def_use(text.trim_end_matches(';'), LANG) }
            }
            NodeKind::FunctionDef => {
                let mut du = DefUse::default();
                du.defs.extend(node.name_hint.clone());
                du
            }
            _ => scan::stmt_def_use(text.trim_end_matches(';'), LANG),
        }
    }

    fn assume_text(&self, cond: &str, positive: bool) -> String {
        if positive {
            format!("assume({cond});")
        } else if let Some((s, e, neg)) = scan::single_comparison(cond, LANG) {
            format!("assume({}{}{});", &cond[..s], neg, &cond[e..])
        } else {
            format!("assume(!({cond}));")
        }
    }

    fn unreachable_text(&self) -> String {
        "assume(0);".to_string()
    }

    fn line_comment(&self) -> &'static str {
        "//"
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<ScanTok>,
    pos: usize,
    file_id: u32,
}

impl<'a> Parser<'a> {
    fn range(&self, s: usize, e: usize) -> Range {
        Range::new(self.file_id, s, e)
    }

    fn text(&self, k: usize) -> &'a str {
        self.toks.get(k).map_or("", |t| &self.src[t.start..t.end])
    }

    fn peek(&self) -> &'a str {
        self.text(self.pos)
    }

    fn start(&self, k: usize) -> usize {
        self.toks.get(k).map_or(self.src.len(), |t| t.start)
    }

    fn end(&self, k: usize) -> usize {
        self.toks[k].end
    }

    /// Index of the bracket matching the opener at `k`, or the last token.
    fn matching(&self, k: usize) -> usize {
        let (open, close) = match self.text(k) {
            "(" => ("(", ")"),
            "[" => ("[", "]"),
            _ => ("{", "}"),
        };
        let mut depth = 0;
        for j in k..self.toks.len() {
            if self.toks[j].kind != TokKind::Punct {
                continue;
            }
            let t = self.text(j);
            if t == open {
                depth += 1;
            } else if t == close {
                depth -= 1;
                if depth == 0 {
                    return j;
                }
            }
        }
        self.toks.len() - 1
    }

    fn comment_node(&self, k: usize) -> UnifiedNode {
        let t = self.toks[k];
        let text = &self.src[t.start..t.end];
        let r = self.range(t.start, trim_end(self.src, t.start, t.end));
        if let Some(rest) = text.strip_prefix('#') {
            let rest = rest.trim_start();
            let mut words = rest.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty());
            return match words.next() {
                Some("define") => match words.next() {
                    Some(name) => UnifiedNode::new(NodeKind::Declaration, r).with_name(name),
                    None => UnifiedNode::new(NodeKind::Other, r).with_name("preprocessor"),
                },
                Some(w) => UnifiedNode::new(NodeKind::Other, r).with_name(w.to_string()),
                None => UnifiedNode::new(NodeKind::Other, r).with_name("preprocessor"),
            };
        }
        UnifiedNode::new(NodeKind::Comment, r)
    }

    fn top_level(&mut self) -> Vec<UnifiedNode> {
        let mut out = Vec::new();
        while self.pos < self.toks.len() {
            if self.toks[self.pos].kind == TokKind::Comment {
                out.push(self.comment_node(self.pos));
                self.pos += 1;
                continue;
            }
            let first = self.pos;
            // Scan to `;` or a body `{` at depth 0.
            let mut k = self.pos;
            let mut last_paren = None;
            let node = loop {
                if k >= self.toks.len() {
                    let r = self.range(self.start(first), self.end(self.toks.len() - 1));
                    self.pos = self.toks.len();
                    break UnifiedNode::new(NodeKind::Other, r);
                }
                match self.text(k) {
                    "(" | "[" => {
                        if self.text(k) == "(" {
                            last_paren = Some(k);
                        }
                        k = self.matching(k) + 1;
                    }
                    ";" => {
                        self.pos = k + 1;
                        break self.top_declaration(first, k);
                    }
                    "{" => {
                        let close = self.matching(k);
                        let is_fn = k > 0 && self.text(k - 1) == ")" && last_paren.is_some();
                        if is_fn {
                            let name_tok = last_paren.unwrap().checked_sub(1).filter(|&j| self.toks[j].kind == TokKind::Ident);
                            let name = name_tok.map(|j| self.text(j).to_string()).unwrap_or_default();
                            self.pos = k;
                            let body = self.block();
                            break UnifiedNode::new(NodeKind::FunctionDef, self.range(self.start(first), body.range.end))
                                .with_children(vec![body])
                                .with_name(name);
                        }
                        // struct/enum/union body: continue to the terminating `;`.
                        k = close + 1;
                    }
                    _ => k += 1,
                }
            };
            out.push(node);
        }
        out
    }

    fn top_declaration(&self, first: usize, semi: usize) -> UnifiedNode {
        let r = self.range(self.start(first), self.end(semi));
        let text = &self.src[r.start..r.end - 1];
        // Prototype: `T name(args);`
        let toks: Vec<&ScanTok> = self.toks[first..semi].iter().collect();
        if let Some(p) = toks.iter().position(|t| &self.src[t.start..t.end] == "(") {
            if p > 0 && toks[p - 1].kind == TokKind::Ident && !text.contains('=') {
                let name = &self.src[toks[p - 1].start..toks[p - 1].end];
                return UnifiedNode::new(NodeKind::Declaration, r).with_name(name);
            }
        }
        let lhs = text.split('=').next().unwrap_or(text);
        let name = scan::declared_names(lhs, LANG).into_iter().next().unwrap_or_default();
        UnifiedNode::new(NodeKind::Declaration, r).with_name(name)
    }

    /// `{ ... }` starting at the current token.
    fn block(&mut self) -> UnifiedNode {
        let open = self.pos;
        let close = self.matching(open);
        self.pos = open + 1;
        let mut children = Vec::new();
        while self.pos < close {
            if self.toks[self.pos].kind == TokKind::Comment {
                children.push(self.comment_node(self.pos));
                self.pos += 1;
                continue;
            }
            children.push(self.statement(close));
        }
        self.pos = close + 1;
        let end = if close < self.toks.len() { self.end(close) } else { self.src.len() };
        UnifiedNode::new(NodeKind::Block, self.range(self.start(open), end)).with_children(children)
    }

    /// Index of the `;` ending the simple statement at `from` (bounded by `limit`).
    fn semicolon(&self, from: usize, limit: usize) -> usize {
        let mut k = from;
        while k < limit {
            match self.text(k) {
                "(" | "[" | "{" => k = self.matching(k) + 1,
                ";" => return k,
                _ => k += 1,
            }
        }
        limit.saturating_sub(1).max(from)
    }

    fn paren_cond(&mut self) -> Option<(UnifiedNode, usize)> {
        if self.peek() != "(" {
            return None;
        }
        let open = self.pos;
        let close = self.matching(open);
        let r = if close > open + 1 {
            self.range(self.start(open + 1), self.end(close - 1))
        } else {
            self.range(self.end(open), self.end(open))
        };
        self.pos = close + 1;
        Some((UnifiedNode::new(NodeKind::ConditionExpr, r), close))
    }

    fn statement(&mut self, limit: usize) -> UnifiedNode {
        let first = self.pos;
        let s = self.start(first);
        let word = self.peek();
        match word {
            "{" => return self.block(),
            "if" => {
                self.pos += 1;
                let Some((cond, _)) = self.paren_cond() else { return self.opaque(first, limit, "if") };
                let then = self.statement(limit);
                let mut end = then.range.end;
                let mut children = vec![cond, then];
                while self.pos < limit && self.toks[self.pos].kind == TokKind::Comment {
                    // Comments between `}` and `else` are left as gaps.
                    if self.text(self.pos + 1) != "else" && !self.next_is_else(self.pos) {
                        break;
                    }
                    self.pos += 1;
                }
                if self.peek() == "else" && self.pos < limit {
                    self.pos += 1;
                    let els = self.statement(limit);
                    end = els.range.end;
                    children.push(els);
                }
                return UnifiedNode::new(NodeKind::If, self.range(s, end)).with_children(children);
            }
            "while" => {
                self.pos += 1;
                let Some((cond, _)) = self.paren_cond() else { return self.opaque(first, limit, "while") };
                let body = self.statement(limit);
                let end = body.range.end;
                return UnifiedNode::new(NodeKind::While, self.range(s, end)).with_children(vec![cond, body]);
            }
            "for" => return self.for_stmt(limit),
            "do" | "switch" => {
                // Opaque up to the end of the construct.
                self.pos += 1;
                if word == "switch" {
                    let _ = self.paren_cond();
                }
                let body = self.statement(limit);
                let mut end = body.range.end;
                if word == "do" && self.peek() == "while" {
                    let semi = self.semicolon(self.pos, limit + 1);
                    end = self.end(semi);
                    self.pos = semi + 1;
                }
                return UnifiedNode::new(NodeKind::Other, self.range(s, end)).with_name(word);
            }
            ";" => {
                self.pos += 1;
                return UnifiedNode::new(NodeKind::Other, self.range(s, self.end(first))).with_name("empty");
            }
            _ => {}
        }
        // Label `name:`.
        if self.toks[first].kind == TokKind::Ident && self.text(first + 1) == ":" && !matches!(word, "default" | "case") {
            self.pos = first + 2;
            return UnifiedNode::new(NodeKind::Other, self.range(s, self.end(first + 1))).with_name("label");
        }
        let semi = self.semicolon(first, limit);
        self.pos = semi + 1;
        let r = self.range(s, self.end(semi));
        self.simple(r, first, semi)
    }

    fn next_is_else(&self, k: usize) -> bool {
        let mut j = k;
        while j < self.toks.len() && self.toks[j].kind == TokKind::Comment {
            j += 1;
        }
        self.text(j) == "else"
    }

    fn opaque(&mut self, first: usize, limit: usize, name: &str) -> UnifiedNode {
        let semi = self.semicolon(first, limit);
        self.pos = semi + 1;
        UnifiedNode::new(NodeKind::Other, self.range(self.start(first), self.end(semi))).with_name(name)
    }

    fn for_stmt(&mut self, limit: usize) -> UnifiedNode {
        let first = self.pos;
        self.pos += 1;
        if self.peek() != "(" {
            return self.opaque(first, limit, "for");
        }
        let open = self.pos;
        let close = self.matching(open);
        let mut parts = Vec::new();
        let mut from = open + 1;
        let mut k = from;
        while k < close {
            match self.text(k) {
                "(" | "[" | "{" => k = self.matching(k) + 1,
                ";" => {
                    parts.push((from, k));
                    from = k + 1;
                    k += 1;
                }
                _ => k += 1,
            }
        }
        parts.push((from, close));
        if parts.len() != 3 {
            // Range-based or malformed header.
            self.pos = close + 1;
            let body = self.statement(limit);
            return UnifiedNode::new(NodeKind::Other, self.range(self.start(first), body.range.end)).with_name("for");
        }
        let mut children = Vec::new();
        let clause = |p: &Self, (a, b): (usize, usize)| (a < b).then(|| p.range(p.start(a), p.end(b - 1)));
        if let Some(r) = clause(self, parts[0]) {
            children.push(self.simple(r, parts[0].0, parts[0].1).with_role(Role::ForInit));
        }
        if let Some(r) = clause(self, parts[1]) {
            children.push(UnifiedNode::new(NodeKind::ConditionExpr, r));
        }
        let update = clause(self, parts[2]).map(|r| self.simple(r, parts[2].0, parts[2].1).with_role(Role::ForUpdate));
        children.extend(update);
        self.pos = close + 1;
        let body = self.statement(limit);
        let end = body.range.end;
        children.push(body);
        UnifiedNode::new(NodeKind::For, self.range(self.start(first), end)).with_children(children)
    }

    fn is_declaration(&self, first: usize, end: usize) -> bool {
        let w = self.text(first);
        if TYPE_WORDS.contains(&w) {
            return true;
        }
        if self.toks[first].kind != TokKind::Ident || first + 1 >= end {
            return false;
        }
        // `T x`, `T *x`, `T **x` followed by a declarator terminator.
        let mut k = first + 1;
        while k < end && self.text(k) == "*" {
            k += 1;
        }
        k < end
            && self.toks[k].kind == TokKind::Ident
            && matches!(self.text(k + 1), "=" | ";" | "," | "[" | ")")
            && (k > first + 1 || self.text(k + 1) != ")")
    }

    /// A simple statement spanning tokens `first..end` (exclusive of any `;` at `end`).
    fn simple(&self, r: Range, first: usize, end: usize) -> UnifiedNode {
        let word = self.text(first);
        match word {
            "return" => return UnifiedNode::new(NodeKind::Return, r).with_name("return"),
            "break" | "continue" | "goto" | "case" | "default" => return UnifiedNode::new(NodeKind::Other, r).with_name(word),
            "assume" if self.text(first + 1) == "(" => {
                let close = self.matching(first + 1);
                let cond = if close > first + 2 {
                    self.range(self.start(first + 2), self.end(close - 1))
                } else {
                    self.range(self.end(first + 1), self.end(first + 1))
                };
                return UnifiedNode::new(NodeKind::Assume, r).with_children(vec![UnifiedNode::new(NodeKind::ConditionExpr, cond)]);
            }
            "assert" => return UnifiedNode::new(NodeKind::Call, r).with_name("assert"),
            _ => {}
        }
        let text = &self.src[r.start..r.end];
        let body = text.trim_end_matches(';');
        let mut depth = 0;
        let mut assign = false;
        for k in first..end {
            match self.text(k) {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=" | "++" | "--" if depth == 0 => {
                    assign = true;
                }
                _ => {}
            }
        }
        if self.is_declaration(first, end) {
            let first = body.split('=').next().unwrap_or(body);
            let name = scan::declared_names(first, LANG).into_iter().next().unwrap_or_default();
            let kind = if assign { NodeKind::Assignment } else { NodeKind::Declaration };
            return UnifiedNode::new(kind, r).with_name(name);
        }
        if assign {
            return UnifiedNode::new(NodeKind::Assignment, r);
        }
        match scan::first_call(body, LANG) {
            Some(name) => UnifiedNode::new(NodeKind::Call, r).with_name(name),
            None => UnifiedNode::new(NodeKind::Other, r).with_name("expr"),
        }
    }
}

fn trim_end(src: &str, from: usize, to: usize) -> usize {
    from + src[from..to].trim_end().len()
}
