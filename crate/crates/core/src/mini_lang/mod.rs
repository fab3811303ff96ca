// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! The small imperative language used for the worked examples and for the
//! property tests: integers, sequences, `read`/`write`, `assume`, `if`, `while`.

pub mod ast;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod unfold;

pub use ast::{Access, BoolExpr, CmpOp, Cond, Expr, Span, Stmt, StmtKind, VarName};
pub use interp::{run_concrete, run_traced, ConcreteState, ExecError, Status, TraceEvent, Value};
pub use parser::{parse_bool_expr, parse_expr, parse_stmt, parse_syntax, SyntaxTree};
pub use printer::{print_bool, print_expr, print_leaf, print_path, print_stmt};
pub use unfold::{unfold_bounded, LinearPath, Unfolding};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters.
    pub column: usize,
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn at(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = before[line_start..].chars().count() + 1;
        ParseError { line, column, offset, message: message.into() }
    }
}

/// Parses a whole mini-language program.
pub fn parse_mini(src: &str) -> Result<Stmt, ParseError> {
    parse_stmt(src)
}
