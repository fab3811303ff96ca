// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeMap;

use common::{multiset_source, ProgramGen, MAX_LOOP_ITERATIONS};
use proptest::prelude::*;
use symslice::mini_lang::*;

fn multiset() -> Stmt {
    parse_mini(multiset_source()).expect("multiset parses")
}

fn multiset_state(n: i64, input: Vec<i64>) -> ConcreteState {
    ConcreteState::with_vars([("n", Value::int(n)), ("xs", Value::seq(&[]))], input)
}

#[test]
fn parses_skip() {
    assert_eq!(parse_mini("skip").unwrap().kind, StmtKind::Skip);
}

#[test]
fn multiset_parses_to_loop_with_inner_branch() {
    let prog = multiset();
    let parts = prog.flatten();
    assert_eq!(parts.len(), 2);
    let StmtKind::While { cond, body } = &parts[1].kind else { panic!("expected while") };
    assert_eq!(print_bool(&cond.expr), "i <= n");
    let inner: Vec<_> = body.flatten();
    assert_eq!(inner.len(), 5);
    let StmtKind::If { then_branch, else_branch, .. } = &inner[1].kind else { panic!("expected if") };
    assert_eq!(print_leaf(then_branch), "xs.delete(-x)");
    assert_eq!(print_leaf(else_branch), "xs.insert(x)");
}

#[test]
fn spans_reproduce_source_text() {
    let src = multiset_source();
    let prog = multiset();
    let StmtKind::While { cond, body } = &prog.flatten()[1].kind else { panic!() };
    assert_eq!(&src[cond.span.start..cond.span.end], "i <= n");
    let read = body.flatten()[0];
    assert_eq!(&src[read.span.start..read.span.end], "read(x)");
}

#[test]
fn missing_expression_is_a_syntax_error() {
    let err = parse_mini("x := ").unwrap_err();
    assert_eq!((err.line, err.column), (1, 6));
    assert!(err.message.contains("expected"), "{err}");
}

#[test]
fn error_position_is_line_and_column() {
    let err = parse_mini("x := 1\ny := (2 +\n").unwrap_err();
    assert_eq!(err.line, 3);
    let err = parse_mini("x := 1\n  y := ;").unwrap_err();
    assert_eq!((err.line, err.column), (2, 8));
}

#[test]
fn reserved_word_misuse_is_rejected() {
    let err = parse_mini("while := 1").unwrap_err();
    assert!(err.message.contains("reserved"), "{err}");
    assert!(parse_mini("read(if)").is_err());
}

#[test]
fn skip_leaves_state_unchanged() {
    let init = multiset_state(4, vec![1, 2]);
    let out = run_concrete(&parse_mini("skip").unwrap(), init.clone(), 10);
    assert_eq!(out.status, Status::Done);
    assert_eq!(out.env, init.env);
    assert_eq!(out.input, init.input);
    assert!(out.output.is_empty());
}

#[test]
fn false_assumption_blocks() {
    let prog = parse_mini("assume(false)\nx := 1").unwrap();
    let out = run_concrete(&prog, ConcreteState::default_empty(), 10);
    assert_eq!(out.status, Status::BlockedAssume);
    assert!(!out.env.contains_key("x"));
}

#[test]
fn empty_input_and_budget_are_errors() {
    let out = run_concrete(&parse_mini("read(x)").unwrap(), ConcreteState::default_empty(), 10);
    assert_eq!((out.status, out.error), (Status::Error, Some(ExecError::EmptyInput)));
    let spin = parse_mini("while (true) { skip }").unwrap();
    let out = run_concrete(&spin, ConcreteState::default_empty(), 50);
    assert_eq!((out.status, out.error), (Status::Error, Some(ExecError::BudgetExhausted)));
}

#[test]
fn type_mismatch_is_reported() {
    let out = run_concrete(&parse_mini("x := xs + 1").unwrap(), multiset_state(0, vec![]), 10);
    assert_eq!(out.status, Status::Error);
    assert!(matches!(out.error, Some(ExecError::TypeMismatch(_))));
}

/// Hand-stepped: i=1, read 3, insert, z=1, write 1, i=2, read 5, insert,
/// z=2, write 2, i=3, exit.
#[test]
fn multiset_two_iterations() {
    let out = run_concrete(&multiset(), multiset_state(2, vec![3, 5]), 1000);
    assert_eq!(out.status, Status::Done);
    assert_eq!(out.env["xs"], Value::seq(&[3, 5]));
    assert_eq!(out.env["i"], Value::int(3));
    assert_eq!(out.output, vec![1.into(), 2.into()]);
}

#[test]
fn multiset_delete_branch() {
    let out = run_concrete(&multiset(), multiset_state(3, vec![4, 7, -4]), 1000);
    assert_eq!(out.env["xs"], Value::seq(&[7]));
    let out = run_concrete(&multiset(), multiset_state(1, vec![-9]), 1000);
    assert_eq!(out.env["xs"], Value::seq(&[]));
}

const MULTISET_PATH: &str = "\
i := 1
assume(i <= n)
read(x)
assume(!(x < 0))
xs.insert(x)
z := xs.size()
write(z)
i := i + 1
assume(i <= n)
read(x)
assume(!(x < 0))
xs.insert(x)
z := xs.size()
write(z)
i := i + 1
assume(!(i <= n))
";

#[test]
fn multiset_bound_two_contains_the_example_path() {
    let unf = unfold_bounded(&multiset(), 2);
    assert!(unf.truncated);
    let hit: Vec<_> = unf.paths.iter().filter(|p| p.text() == MULTISET_PATH).collect();
    assert_eq!(hit.len(), 1);
    assert_eq!(hit[0].len(), 16);
    assert!(hit[0].is_linear());
}

#[test]
fn example_path_runs_like_the_program() {
    let unf = unfold_bounded(&multiset(), 2);
    let path = unf.paths.iter().find(|p| p.text() == MULTISET_PATH).unwrap();
    let a = run_concrete(&path.to_stmt(), multiset_state(2, vec![3, 5]), 1000);
    let b = run_concrete(&multiset(), multiset_state(2, vec![3, 5]), 1000);
    assert_eq!(a.status, Status::Done);
    assert_eq!((a.env, a.output), (b.env, b.output));
}

#[test]
fn if_unfolds_to_two_assumed_paths() {
    let prog = parse_mini("if (b > 0) { x := 1 } else { x := 2 }").unwrap();
    let texts: Vec<String> = unfold_bounded(&prog, 0).paths.iter().map(|p| p.text()).collect();
    assert_eq!(texts, vec!["assume(b > 0)\nx := 1\n", "assume(!(b > 0))\nx := 2\n"]);
}

/// Independent count straight from the unfold equations.
fn count_paths(s: &Stmt, k: u32) -> u128 {
    match &s.kind {
        StmtKind::Seq(a, b) => count_paths(a, k) * count_paths(b, k),
        StmtKind::If { then_branch, else_branch, .. } => count_paths(then_branch, k) + count_paths(else_branch, k),
        StmtKind::While { body, .. } => {
            let b = count_paths(body, k);
            (0..=k).map(|j| b.pow(j)).sum()
        }
        _ => 1,
    }
}

#[test]
fn multiset_path_count_matches_independent_counter() {
    for k in 0..=5 {
        let expected = count_paths(&multiset(), k);
        assert_eq!(expected, (0..=k).map(|j| 2u128.pow(j)).sum::<u128>());
        assert_eq!(unfold_bounded(&multiset(), k as usize).paths.len() as u128, expected, "bound {k}");
    }
}

#[test]
fn printer_is_canonical() {
    let prog = parse_mini("i:=1;while(i<=n){xs.insert(x) ; i:=i+1}").unwrap();
    assert_eq!(print_stmt(&prog), "i := 1\nwhile (i <= n) {\n  xs.insert(x)\n  i := i + 1\n}\n");
}

fn gen_program(seed: u64) -> Stmt {
    ProgramGen::new(seed).program()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_round_trips(seed in any::<u64>()) {
        let prog = gen_program(seed);
        let text = print_stmt(&prog);
        let reparsed = parse_mini(&text).unwrap();
        prop_assert_eq!(reparsed.normalized(), prog.normalized());
        prop_assert_eq!(print_stmt(&reparsed), text);
    }

    #[test]
    fn every_unfolded_path_is_linear(seed in any::<u64>()) {
        let prog = gen_program(seed);
        for p in unfold_bounded(&prog, 2).paths {
            prop_assert!(p.is_linear());
        }
    }

    #[test]
    fn unfolding_grows_with_the_bound(seed in any::<u64>(), k in 0usize..2) {
        let prog = gen_program(seed);
        let small: Vec<String> = unfold_bounded(&prog, k).paths.iter().map(|p| p.text()).collect();
        let large: std::collections::HashSet<String> =
            unfold_bounded(&prog, k + 1).paths.iter().map(|p| p.text()).collect();
        for t in small {
            prop_assert!(large.contains(&t));
        }
    }

    #[test]
    fn completed_run_matches_exactly_one_path(seed in any::<u64>()) {
        let mut gen = ProgramGen::new(seed);
        let prog = gen.program();
        let init = gen.initial_state();
        let full = run_concrete(&prog, init.clone(), 10_000);
        prop_assume!(full.status == Status::Done);
        let mut matching = 0;
        for p in unfold_bounded(&prog, MAX_LOOP_ITERATIONS).paths {
            let out = run_concrete(&p.to_stmt(), init.clone(), 10_000);
            if out.status == Status::Done {
                matching += 1;
                prop_assert_eq!(&out.env, &full.env);
                prop_assert_eq!(&out.output, &full.output);
            }
        }
        prop_assert_eq!(matching, 1);
    }
}

trait EmptyState {
    fn default_empty() -> Self;
}

impl EmptyState for ConcreteState {
    fn default_empty() -> Self {
        ConcreteState::new(BTreeMap::new(), vec![])
    }
}
