// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Concrete single-trace interpreter. This is the ground truth the property
//! tests compare truncations and slices against.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::ast::*;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Seq(Vec<BigInt>),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn seq(items: &[i64]) -> Value {
        Value::Seq(items.iter().map(|&n| BigInt::from(n)).collect())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Seq(items) => {
                let parts: Vec<String> = items.iter().map(|n| n.to_string()).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    BlockedAssume,
    Done,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecError {
    BudgetExhausted,
    EmptyInput,
    UndefinedVariable(VarName),
    TypeMismatch(String),
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecError::BudgetExhausted => write!(f, "step budget exhausted"),
            ExecError::EmptyInput => write!(f, "read from an empty input queue"),
            ExecError::UndefinedVariable(v) => write!(f, "undefined variable `{v}`"),
            ExecError::TypeMismatch(msg) => write!(f, "type mismatch: {msg}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteState {
    pub env: BTreeMap<VarName, Value>,
    pub input: VecDeque<BigInt>,
    pub output: Vec<BigInt>,
    pub status: Status,
    pub error: Option<ExecError>,
}

impl ConcreteState {
    pub fn new(env: BTreeMap<VarName, Value>, input: Vec<i64>) -> Self {
        ConcreteState {
            env,
            input: input.into_iter().map(BigInt::from).collect(),
            output: Vec::new(),
            status: Status::Running,
            error: None,
        }
    }

    pub fn with_vars<'a>(vars: impl IntoIterator<Item = (&'a str, Value)>, input: Vec<i64>) -> Self {
        let env = vars.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        ConcreteState::new(env, input)
    }

    fn fail(&mut self, err: ExecError) {
        self.status = Status::Error;
        self.error = Some(err);
    }
}

/// One executed leaf statement or evaluated condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    /// Span of the statement (or of the condition, for branch and loop tests).
    pub span: Span,
    pub reads: BTreeSet<VarName>,
    pub writes: BTreeSet<VarName>,
}

enum Frame<'a> {
    Exec(&'a Stmt),
}

pub fn run_concrete(prog: &Stmt, init: ConcreteState, step_budget: usize) -> ConcreteState {
    run_inner(prog, init, step_budget, None)
}

/// Like [`run_concrete`], also returning the read/write trace.
pub fn run_traced(prog: &Stmt, init: ConcreteState, step_budget: usize) -> (ConcreteState, Vec<TraceEvent>) {
    let mut trace = Vec::new();
    let st = run_inner(prog, init, step_budget, Some(&mut trace));
    (st, trace)
}

fn run_inner(
    prog: &Stmt,
    mut st: ConcreteState,
    step_budget: usize,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> ConcreteState {
    assert!(step_budget > 0, "step budget must be positive");
    st.status = Status::Running;
    st.error = None;
    let mut stack = vec![Frame::Exec(prog)];
    let mut steps = 0usize;
    while let Some(Frame::Exec(stmt)) = stack.pop() {
        if let StmtKind::Seq(a, b) = &stmt.kind {
            stack.push(Frame::Exec(b));
            stack.push(Frame::Exec(a));
            continue;
        }
        steps += 1;
        if steps > step_budget {
            st.fail(ExecError::BudgetExhausted);
            return st;
        }
        let mut reads = BTreeSet::new();
        let mut writes = BTreeSet::new();
        let mut span = stmt.span;
        let outcome: Result<(), ExecError> = match &stmt.kind {
            StmtKind::Seq(..) => unreachable!(),
            StmtKind::Skip => Ok(()),
            StmtKind::Assume(c) => eval_bool(&c.expr, &st.env, &mut reads).map(|b| {
                if !b {
                    st.status = Status::BlockedAssume;
                }
            }),
            StmtKind::Assign { target, value } => eval(value, &st.env, &mut reads).map(|v| {
                writes.insert(target.clone());
                st.env.insert(target.clone(), v);
            }),
            StmtKind::Read(target) => match st.input.pop_front() {
                Some(n) => {
                    writes.insert(target.clone());
                    st.env.insert(target.clone(), Value::Int(n));
                    Ok(())
                }
                None => Err(ExecError::EmptyInput),
            },
            StmtKind::Write(e) => eval(e, &st.env, &mut reads).and_then(|v| match v {
                Value::Int(n) => {
                    st.output.push(n);
                    Ok(())
                }
                Value::Seq(_) => Err(ExecError::TypeMismatch("write expects an integer".into())),
            }),
            StmtKind::If { cond, then_branch, else_branch } => {
                span = cond.span;
                eval_bool(&cond.expr, &st.env, &mut reads).map(|b| {
                    stack.push(Frame::Exec(if b { then_branch } else { else_branch }));
                })
            }
            StmtKind::While { cond, body } => {
                span = cond.span;
                eval_bool(&cond.expr, &st.env, &mut reads).map(|b| {
                    if b {
                        stack.push(Frame::Exec(stmt));
                        stack.push(Frame::Exec(body));
                    }
                })
            }
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceEvent { span, reads, writes });
        }
        if let Err(e) = outcome {
            st.fail(e);
            return st;
        }
        if st.status == Status::BlockedAssume {
            return st;
        }
    }
    st.status = Status::Done;
    st
}

fn lookup<'e>(env: &'e BTreeMap<VarName, Value>, v: &str, reads: &mut BTreeSet<VarName>) -> Result<&'e Value, ExecError> {
    reads.insert(v.to_string());
    env.get(v).ok_or_else(|| ExecError::UndefinedVariable(v.to_string()))
}

fn as_int(v: Value, what: &str) -> Result<BigInt, ExecError> {
    match v {
        Value::Int(n) => Ok(n),
        Value::Seq(_) => Err(ExecError::TypeMismatch(format!("{what} expects an integer"))),
    }
}

fn as_seq<'e>(v: &'e Value, name: &str) -> Result<&'e Vec<BigInt>, ExecError> {
    match v {
        Value::Seq(items) => Ok(items),
        Value::Int(_) => Err(ExecError::TypeMismatch(format!("`{name}` is not a sequence"))),
    }
}

pub fn eval(e: &Expr, env: &BTreeMap<VarName, Value>, reads: &mut BTreeSet<VarName>) -> Result<Value, ExecError> {
    Ok(match e {
        Expr::Int(n) => Value::Int(n.clone()),
        Expr::Var(v) => lookup(env, v, reads)?.clone(),
        Expr::SeqLit(items) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                out.push(as_int(eval(item, env, reads)?, "sequence element")?);
            }
            Value::Seq(out)
        }
        Expr::Neg(a) => Value::Int(-as_int(eval(a, env, reads)?, "negation")?),
        Expr::Add(a, b) => Value::Int(as_int(eval(a, env, reads)?, "+")? + as_int(eval(b, env, reads)?, "+")?),
        Expr::Sub(a, b) => Value::Int(as_int(eval(a, env, reads)?, "-")? - as_int(eval(b, env, reads)?, "-")?),
        Expr::Mul(a, b) => Value::Int(as_int(eval(a, env, reads)?, "*")? * as_int(eval(b, env, reads)?, "*")?),
        Expr::Insert(v, x) => {
            let mut items = as_seq(lookup(env, v, reads)?, v)?.clone();
            items.push(as_int(eval(x, env, reads)?, "insert")?);
            Value::Seq(items)
        }
        Expr::Delete(v, x) => {
            let mut items = as_seq(lookup(env, v, reads)?, v)?.clone();
            let target = as_int(eval(x, env, reads)?, "delete")?;
            if let Some(pos) = items.iter().position(|n| *n == target) {
                items.remove(pos);
            }
            Value::Seq(items)
        }
        Expr::Size(v) => {
            let len = as_seq(lookup(env, v, reads)?, v)?.len();
            Value::Int(BigInt::from(len.to_i64().unwrap_or(i64::MAX)))
        }
    })
}

pub fn eval_bool(b: &BoolExpr, env: &BTreeMap<VarName, Value>, reads: &mut BTreeSet<VarName>) -> Result<bool, ExecError> {
    Ok(match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Cmp(op, l, r) => {
            let lv = eval(l, env, reads)?;
            let rv = eval(r, env, reads)?;
            match op {
                CmpOp::Eq => lv == rv,
                CmpOp::Ne => lv != rv,
                _ => {
                    let (a, c) = (as_int(lv, op.symbol())?, as_int(rv, op.symbol())?);
                    match op {
                        CmpOp::Lt => a < c,
                        CmpOp::Le => a <= c,
                        CmpOp::Gt => a > c,
                        CmpOp::Ge => a >= c,
                        CmpOp::Eq | CmpOp::Ne => unreachable!(),
                    }
                }
            }
        }
        BoolExpr::Not(inner) => !eval_bool(inner, env, reads)?,
        // Both operands are evaluated so the read set does not depend on short-circuiting.
        BoolExpr::And(a, c) => {
            let x = eval_bool(a, env, reads)?;
            let y = eval_bool(c, env, reads)?;
            x && y
        }
        BoolExpr::Or(a, c) => {
            let x = eval_bool(a, env, reads)?;
            let y = eval_bool(c, env, reads)?;
            x || y
        }
    })
}
