// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random mini-language programs shared by the property tests and the
//! acceptance target.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symslice::mini_lang::*;

pub const INT_VARS: &[&str] = &["a", "b", "c"];
pub const SEQ_VAR: &str = "xs";

pub struct ProgramGen {
    rng: ChaCha8Rng,
    /// Remaining branching statements (if/while) the generator may emit.
    branches_left: usize,
    /// Remaining leaf statements.
    leaves_left: usize,
    loop_depth: usize,
    max_loop_depth: usize,
}

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            branches_left: 3,
            leaves_left: 7,
            loop_depth: 0,
            max_loop_depth: 2,
        }
    }

    pub fn with_limits(seed: u64, branches: usize, leaves: usize) -> Self {
        ProgramGen { branches_left: branches, leaves_left: leaves, ..ProgramGen::new(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn program(&mut self) -> Stmt {
        let n = self.rng.random_range(1..=4);
        let s = self.block(n);
        if s.flatten().iter().all(|s| matches!(s.kind, StmtKind::Skip)) {
            return leaf(StmtKind::Write(Expr::Var("a".into())));
        }
        s
    }

    fn block(&mut self, n: usize) -> Stmt {
        let mut stmts = Vec::new();
        for _ in 0..n {
            if self.leaves_left == 0 && self.branches_left == 0 {
                break;
            }
            stmts.push(self.stmt());
        }
        if stmts.is_empty() {
            stmts.push(Stmt::skip());
        }
        Stmt::seq(stmts)
    }

    fn stmt(&mut self) -> Stmt {
        let choice = self.rng.random_range(0..10);
        if self.branches_left > 0 && choice < 2 {
            self.branches_left -= 1;
            let cond = self.cond();
            let then_n = self.rng.random_range(1..=2);
            let else_n = self.rng.random_range(0..=2);
            let then_branch = self.block(then_n);
            let else_branch = if else_n == 0 { Stmt::skip() } else { self.block(else_n) };
            return leaf(StmtKind::If { cond: Cond::synthetic(cond), then_branch: Box::new(then_branch), else_branch: Box::new(else_branch) });
        }
        if self.branches_left > 0 && choice < 4 && self.loop_depth < self.max_loop_depth {
            return self.bounded_loop();
        }
        if self.leaves_left == 0 {
            return Stmt::skip();
        }
        self.leaves_left -= 1;
        self.leaf_stmt()
    }

    /// `lD := 0; while (lD < m [&& c]) { body; lD := lD + 1 }` with a
    /// constant `m` and a counter per nesting depth that the body never writes.
    fn bounded_loop(&mut self) -> Stmt {
        self.branches_left -= 1;
        let counter = format!("l{}", self.loop_depth);
        let limit = self.rng.random_range(0..=MAX_LOOP_ITERATIONS as i64);
        let extra = if self.rng.random_bool(0.4) { Some(self.cond()) } else { None };
        self.loop_depth += 1;
        let n = self.rng.random_range(1..=2);
        let body = self.block(n);
        self.loop_depth -= 1;
        let inc = leaf(StmtKind::Assign {
            target: counter.clone(),
            value: Expr::Add(Box::new(Expr::Var(counter.clone())), Box::new(int(1))),
        });
        let bound = BoolExpr::Cmp(CmpOp::Lt, Expr::Var(counter.clone()), int(limit));
        let cond = match extra {
            Some(c) => BoolExpr::And(Box::new(bound), Box::new(c)),
            None => bound,
        };
        Stmt::seq(vec![
            leaf(StmtKind::Assign { target: counter.clone(), value: int(0) }),
            leaf(StmtKind::While { cond: Cond::synthetic(cond), body: Box::new(Stmt::seq(vec![body, inc])) }),
        ])
    }

    fn int_var(&mut self) -> String {
        INT_VARS[self.rng.random_range(0..INT_VARS.len())].to_string()
    }

    fn leaf_stmt(&mut self) -> Stmt {
        match self.rng.random_range(0..9) {
            0..=2 => {
                let target = self.int_var();
                let value = self.expr(2);
                leaf(StmtKind::Assign { target, value })
            }
            3 => leaf(StmtKind::Read(self.int_var())),
            4 => leaf(StmtKind::Write(self.expr(1))),
            5 => {
                let e = self.expr(1);
                leaf(StmtKind::Assign { target: SEQ_VAR.into(), value: Expr::Insert(SEQ_VAR.into(), Box::new(e)) })
            }
            6 => {
                let e = self.expr(1);
                leaf(StmtKind::Assign { target: SEQ_VAR.into(), value: Expr::Delete(SEQ_VAR.into(), Box::new(e)) })
            }
            7 => {
                let target = self.int_var();
                leaf(StmtKind::Assign { target, value: Expr::Size(SEQ_VAR.into()) })
            }
            _ => {
                let c = self.cond();
                leaf(StmtKind::Assume(Cond::synthetic(c)))
            }
        }
    }

    fn expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.random_bool(0.5) {
            return if self.rng.random_bool(0.6) {
                Expr::Var(self.int_var())
            } else {
                int(self.rng.random_range(-2..=3))
            };
        }
        let a = Box::new(self.expr(depth - 1));
        let b = Box::new(self.expr(depth - 1));
        match self.rng.random_range(0..3) {
            0 => Expr::Add(a, b),
            1 => Expr::Sub(a, b),
            _ => Expr::Mul(a, b),
        }
    }

    fn cond(&mut self) -> BoolExpr {
        let op = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne][self.rng.random_range(0..6)];
        let l = Expr::Var(self.int_var());
        let r = self.expr(1);
        let c = BoolExpr::Cmp(op, l, r);
        match self.rng.random_range(0..6) {
            0 => BoolExpr::Not(Box::new(c)),
            1 => {
                let other = BoolExpr::Cmp(CmpOp::Ge, Expr::Var(self.int_var()), int(0));
                BoolExpr::And(Box::new(c), Box::new(other))
            }
            _ => c,
        }
    }

    /// Initial state binding every variable the generator can reference.
    pub fn initial_state(&mut self) -> ConcreteState {
        let mut env = BTreeMap::new();
        for v in INT_VARS {
            env.insert(v.to_string(), Value::int(self.rng.random_range(-3..=3)));
        }
        env.insert("l0".into(), Value::int(0));
        env.insert("l1".into(), Value::int(0));
        env.insert(SEQ_VAR.into(), Value::seq(&[]));
        let input: Vec<i64> = (0..40).map(|_| self.rng.random_range(-3..=3)).collect();
        ConcreteState::new(env, input)
    }
}

fn leaf(kind: StmtKind) -> Stmt {
    Stmt::synthetic(kind)
}

fn int(n: i64) -> Expr {
    Expr::Int(BigInt::from(n))
}

/// Largest loop limit the generator emits; unfolding at this bound covers
/// every terminating execution of a generated program.
pub const MAX_LOOP_ITERATIONS: usize = 2;

pub fn multiset_source() -> &'static str {
    include_str!("../fixtures/multiset.mini")
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
