// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Best-effort Python adapter driven by logical lines and indentation.

use super::scan::{self, TokKind};
use super::{attach_comments, DefUse, GrammarAdapter, Language, NodeKind, Range, UnifiedNode};

pub struct PythonAdapter;

const LANG: Language = Language::Python;

#[derive(Clone, Copy, Debug)]
struct Line {
    indent: usize,
    start: usize,
    /// End of the code, before any trailing comment and whitespace.
    end: usize,
    comment: Option<(usize, usize)>,
}

impl Line {
    fn is_comment_only(&self) -> bool {
        self.start == self.end
    }
}

/// Splits `src` into logical lines, joining bracketed and backslash continuations.
fn logical_lines(src: &str) -> Vec<Line> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let line_start = i;
        while i < b.len() && (b[i] == b' ' || b[i] == b'\t') {
            i += 1;
        }
        if i >= b.len() {
            break;
        }
        if b[i] == b'\n' || b[i] == b'\r' {
            i += 1;
            continue;
        }
        let indent = src[line_start..i].chars().map(|c| if c == '\t' { 8 } else { 1 }).sum();
        let start = i;
        let mut depth = 0i32;
        let mut end = i;
        let mut comment = None;
        while i < b.len() {
            match b[i] {
                b'#' => {
                    let ce = b[i..].iter().position(|&c| c == b'\n').map_or(b.len(), |k| i + k);
                    comment = Some((i, ce.min(trim_end(src, i, ce))));
                    i = ce;
                    if depth > 0 {
                        comment = None;
                        continue;
                    }
                    break;
                }
                b'"' | b'\'' => {
                    i = scan::skip_string(src, i, LANG);
                    end = i;
                }
                b'(' | b'[' | b'{' => {
                    depth += 1;
                    i += 1;
                    end = i;
                }
                b')' | b']' | b'}' => {
                    depth -= 1;
                    i += 1;
                    end = i;
                }
                b'\\' if b.get(i + 1) == Some(&b'\n') => i += 2,
                b'\n' if depth <= 0 => break,
                c => {
                    i += 1;
                    if !c.is_ascii_whitespace() {
                        end = i;
                    }
                }
            }
        }
        let code_end = if comment.is_some() && end == start { start } else { end };
        out.push(Line { indent, start, end: code_end, comment });
    }
    out
}

fn trim_end(src: &str, from: usize, to: usize) -> usize {
    from + src[from..to].trim_end().len()
}

struct Builder<'a> {
    src: &'a str,
    lines: Vec<Line>,
    pos: usize,
    file_id: u32,
    comments: Vec<UnifiedNode>,
}

impl GrammarAdapter for PythonAdapter {
    fn language(&self) -> Language {
        LANG
    }

    fn parse(&self, src: &str, file_id: u32) -> UnifiedNode {
        let lines = logical_lines(src);
        let mut comments = Vec::new();
        for l in &lines {
            if let Some((s, e)) = l.comment {
                comments.push(UnifiedNode::new(NodeKind::Comment, Range::new(file_id, s, e)));
            }
        }
        let mut b = Builder { src, lines, pos: 0, file_id, comments: Vec::new() };
        let children = b.block(0, true);
        let mut root = UnifiedNode::new(NodeKind::Block, Range::new(file_id, 0, src.len())).with_children(children);
        comments.extend(b.comments);
        attach_comments(&mut root, comments);
        root
    }

    fn def_use(&self, node: &UnifiedNode, src: &str) -> DefUse {
        let text = node.text(src);
        match node.kind {
            NodeKind::ConditionExpr => {
                let mut du = DefUse::default();
                if let Some((s, e)) = scan::split_for_header(text) {
                    du.defs = scan::var_names(&text[..s], LANG);
                    du.uses = scan::var_names(&text[e..], LANG);
                } else {
                    du.uses = scan::var_names(text, LANG);
                }
                du
            }
            NodeKind::Other => {
                let opaque = !matches!(node.name_hint.as_deref(), Some("pass" | "break" | "continue" | "global" | "expr"));
                DefUse { opaque, ..scan::stmt_def_use(text, LANG) }
            }
            NodeKind::Declaration if node.children.is_empty() && !text.starts_with("import") && !text.starts_with("from") => {
                scan::stmt_def_use(text, LANG)
            }
            NodeKind::FunctionDef | NodeKind::Declaration => {
                let mut du = DefUse::default();
                du.defs.extend(node.name_hint.clone());
                du
            }
            _ => scan::stmt_def_use(text, LANG),
        }
    }

    fn assume_text(&self, cond: &str, positive: bool) -> String {
        if positive {
            format!("assume {cond}")
        } else if let Some((s, e, neg)) = scan::single_comparison(cond, LANG) {
            format!("assume {}{}{}", &cond[..s], neg, &cond[e..])
        } else {
            format!("assume not ({cond})")
        }
    }

    fn unreachable_text(&self) -> String {
        "assume False".to_string()
    }

    fn empty_block_filler(&self) -> Option<&'static str> {
        Some("pass")
    }

    fn line_comment(&self) -> &'static str {
        "#"
    }
}

impl<'a> Builder<'a> {
    fn range(&self, s: usize, e: usize) -> Range {
        Range::new(self.file_id, s, e)
    }

    fn next_code_line(&mut self) -> Option<Line> {
        while self.pos < self.lines.len() && self.lines[self.pos].is_comment_only() {
            self.pos += 1;
        }
        self.lines.get(self.pos).copied()
    }

    /// Statements indented at least `min_indent` (the first one fixes the
    /// block's indentation).
    fn block(&mut self, min_indent: usize, top: bool) -> Vec<UnifiedNode> {
        let mut out = Vec::new();
        let mut indent = None;
        while let Some(line) = self.next_code_line() {
            let expected = *indent.get_or_insert(line.indent);
            if line.indent < expected || line.indent < min_indent {
                break;
            }
            if line.indent > expected {
                // Unexpected indentation: keep the line as an opaque node.
                self.pos += 1;
                out.push(UnifiedNode::new(NodeKind::Other, self.range(line.start, line.end)));
                continue;
            }
            out.push(self.statement(line, top));
        }
        out
    }

    fn first_word(&self, line: &Line) -> &'a str {
        let text = &self.src[line.start..line.end];
        let end = text.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(text.len());
        &text[..end]
    }

    /// Offset of the colon ending a compound-statement header.
    fn header_colon(&self, line: &Line) -> Option<usize> {
        let text = &self.src[line.start..line.end];
        let toks = scan::lex(text, LANG);
        let mut depth = 0i32;
        for t in &toks {
            match t.text(text) {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                ":" if depth == 0 => return Some(line.start + t.start),
                "lambda" => return None,
                _ => {}
            }
        }
        None
    }

    /// Body of a compound statement whose header is `line`.
    fn body(&mut self, line: &Line, colon: usize) -> UnifiedNode {
        let after = colon + 1;
        let rest = &self.src[after..line.end];
        if !rest.trim().is_empty() {
            let off = after + (rest.len() - rest.trim_start().len());
            let inline = Line { indent: line.indent + 1, start: off, end: line.end, comment: None };
            let stmt = self.simple(&inline, false);
            return UnifiedNode::new(NodeKind::Block, stmt.range).with_children(vec![stmt]);
        }
        // Leading comment lines of the body belong to the block.
        let mut first = None;
        let mut k = self.pos;
        while k < self.lines.len() {
            let l = self.lines[k];
            if l.is_comment_only() {
                if l.indent > line.indent && first.is_none() {
                    first = l.comment.map(|c| c.0);
                }
                k += 1;
                continue;
            }
            if l.indent <= line.indent {
                first = None;
            }
            break;
        }
        let children = self.block(line.indent + 1, false);
        match (children.first(), children.last()) {
            (Some(f), Some(l)) => {
                let start = first.unwrap_or(f.range.start).min(f.range.start);
                // A trailing comment on the last line stays inside the block.
                let end = self
                    .lines
                    .iter()
                    .find(|ln| ln.end == l.range.end && !ln.is_comment_only())
                    .and_then(|ln| ln.comment)
                    .map_or(l.range.end, |c| c.1);
                UnifiedNode::new(NodeKind::Block, self.range(start, end)).with_children(children)
            }
            _ => UnifiedNode::new(NodeKind::Block, self.range(after, after)),
        }
    }

    fn statement(&mut self, line: Line, top: bool) -> UnifiedNode {
        let word = self.first_word(&line);
        let colon = self.header_colon(&line);
        match (word, colon) {
            ("if", Some(c)) | ("elif", Some(c)) => {
                self.pos += 1;
                self.if_chain(line, word.len(), c)
            }
            ("while", Some(c)) | ("for", Some(c)) => {
                self.pos += 1;
                let cond = self.cond_node(line.start + word.len(), c);
                let body = self.body(&line, c);
                let kind = if word == "while" { NodeKind::While } else { NodeKind::For };
                let mut node = UnifiedNode::new(kind, self.range(line.start, body.range.end.max(c + 1)))
                    .with_children(vec![cond, body]);
                if let Some(tail) = self.trailing_clause(&line, &["else"]) {
                    node = UnifiedNode::new(NodeKind::Other, self.range(line.start, tail)).with_name(word);
                }
                node
            }
            ("def", Some(c)) | ("class", Some(c)) => {
                self.pos += 1;
                let text = &self.src[line.start + word.len()..c];
                let name: String = text.trim_start().chars().take_while(|ch| ch.is_alphanumeric() || *ch == '_').collect();
                let body = self.body(&line, c);
                let kind = if word == "def" { NodeKind::FunctionDef } else { NodeKind::Declaration };
                UnifiedNode::new(kind, self.range(line.start, body.range.end.max(c + 1))).with_children(vec![body]).with_name(name)
            }
            ("try" | "with" | "async" | "match", Some(c)) => {
                self.pos += 1;
                let body = self.body(&line, c);
                let mut end = body.range.end.max(c + 1);
                if let Some(tail) = self.trailing_clause(&line, &["except", "else", "finally"]) {
                    end = tail;
                }
                UnifiedNode::new(NodeKind::Other, self.range(line.start, end)).with_name(word)
            }
            _ => {
                self.pos += 1;
                self.simple(&line, top)
            }
        }
    }

    /// Consumes clauses such as `else:`/`except:` that continue a compound
    /// statement at the same indentation; returns the new end offset.
    fn trailing_clause(&mut self, header: &Line, words: &[&str]) -> Option<usize> {
        let mut end = None;
        while let Some(l) = self.next_code_line() {
            let w = self.first_word(&l);
            if l.indent != header.indent || !words.contains(&w) {
                break;
            }
            let Some(c) = self.header_colon(&l) else { break };
            self.pos += 1;
            let body = self.body(&l, c);
            end = Some(body.range.end.max(c + 1));
        }
        end
    }

    fn cond_node(&self, from: usize, colon: usize) -> UnifiedNode {
        let text = &self.src[from..colon];
        let lead = text.len() - text.trim_start().len();
        let s = from + lead;
        let e = s + text.trim().len();
        UnifiedNode::new(NodeKind::ConditionExpr, self.range(s, e))
    }

    fn if_chain(&mut self, line: Line, kw_len: usize, colon: usize) -> UnifiedNode {
        let cond = self.cond_node(line.start + kw_len, colon);
        let then = self.body(&line, colon);
        let mut end = then.range.end.max(colon + 1);
        let mut children = vec![cond, then];
        if let Some(next) = self.next_code_line() {
            if next.indent == line.indent {
                let w = self.first_word(&next);
                if let (Some(c), "elif" | "else") = (self.header_colon(&next), w) {
                    self.pos += 1;
                    let part = if w == "elif" { self.if_chain(next, 4, c) } else { self.body(&next, c) };
                    end = part.range.end.max(c + 1);
                    children.push(part);
                }
            }
        }
        UnifiedNode::new(NodeKind::If, self.range(line.start, end)).with_children(children)
    }

    fn simple(&mut self, line: &Line, top: bool) -> UnifiedNode {
        let r = self.range(line.start, line.end);
        let text = &self.src[line.start..line.end];
        let word = self.first_word(line);
        match word {
            "return" | "raise" => return UnifiedNode::new(NodeKind::Return, r).with_name(word),
            "pass" | "break" | "continue" | "global" | "nonlocal" | "yield" => {
                return UnifiedNode::new(NodeKind::Other, r).with_name(word)
            }
            "assume" if text.len() > 6 => {
                let cond_from = line.start + 6;
                return UnifiedNode::new(NodeKind::Assume, r).with_children(vec![self.cond_node(cond_from, line.end)]);
            }
            "assert" => return UnifiedNode::new(NodeKind::Call, r).with_name("assert"),
            "import" | "from" => {
                let names = scan::identifiers(text, LANG);
                let bound = names.last().map(|(n, _)| n.clone()).unwrap_or_default();
                return UnifiedNode::new(if top { NodeKind::Declaration } else { NodeKind::Other }, r).with_name(bound);
            }
            "del" => return UnifiedNode::new(NodeKind::Assignment, r),
            _ => {}
        }
        let toks = scan::lex(text, LANG);
        let mut depth = 0i32;
        let mut assign = false;
        for t in &toks {
            match t.text(text) {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=" | "**=" | "//=" if depth == 0 => {
                    assign = true;
                    break;
                }
                _ => {}
            }
        }
        if assign {
            if top {
                let name = toks.iter().find(|t| t.kind == TokKind::Ident).map(|t| t.text(text).to_string()).unwrap_or_default();
                return UnifiedNode::new(NodeKind::Declaration, r).with_name(name);
            }
            return UnifiedNode::new(NodeKind::Assignment, r);
        }
        match scan::first_call(text, LANG) {
            Some(name) => UnifiedNode::new(NodeKind::Call, r).with_name(name),
            None => UnifiedNode::new(NodeKind::Other, r).with_name("expr"),
        }
    }
}
