// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::{BTreeSet, HashSet};

use common::{multiset_source, ProgramGen, INT_VARS, MAX_LOOP_ITERATIONS, SEQ_VAR};
use proptest::prelude::*;
use rand::Rng;
use symslice::cfg::*;
use symslice::frontend::{parse_unit, Language, Range, SourceUnit, INPUT_STREAM, OUTPUT_STREAM};
use symslice::mini_lang::*;
use symslice::partition::*;
use symslice::slice::*;

fn unit(src: &str) -> SourceUnit {
    parse_unit(src.as_bytes(), Language::Mini, 0).unwrap()
}

fn labels(cfg: &Cfg, cov: &NodeSet) -> BTreeSet<String> {
    cov.iter().map(|n| cfg.nodes[n].label.clone()).collect()
}

fn same_program(actual: &Stmt, expected: &str) {
    let want = parse_mini(expected).unwrap().normalized();
    assert_eq!(actual.normalized(), want, "got:\n{}", print_stmt(actual));
}

fn multiset_partition(cfg: &Cfg, insert: bool, delete: bool) -> Partition {
    let parts = gen_partitions(cfg, PartitionLimits::default());
    parts
        .partitions
        .into_iter()
        .find(|p| {
            let l = labels(cfg, &p.coverage);
            l.contains("xs.insert(x)") == insert && l.contains("xs.delete(-x)") == delete && l.contains("read(x)") == (insert || delete)
        })
        .expect("partition exists")
}

#[test]
fn multiset_truncation_keeps_only_the_else_branch() {
    let u = unit(multiset_source());
    let cfg = build_cfg(&u);
    let t = truncate(&cfg, &multiset_partition(&cfg, true, false));
    same_program(
        &to_mini(&t, &cfg, &u.text).unwrap(),
        "i := 1
         while (i <= n) {
           read(x)
           assume(!(x < 0))
           xs.insert(x)
           z := xs.size()
           write(z)
           i := i + 1
         }",
    );
    assert_eq!(t.synth_assumes.len(), 1);
    assert!(!t.synth_assumes[0].positive);
    assert!(!t.is_vacuous());
}

#[test]
fn multiset_slice_on_n_and_xs() {
    let u = unit(multiset_source());
    let cfg = build_cfg(&u);
    let t = truncate(&cfg, &multiset_partition(&cfg, true, false));
    let s = back_slice(&t, &cfg, &SliceCriterion::vars(["n", "xs"]));
    same_program(
        &to_mini(&s, &cfg, &u.text).unwrap(),
        "i := 1
         while (i <= n) {
           read(x)
           xs.insert(x)
           i := i + 1
         }",
    );
    assert!(!s.synth_assumes[0].kept);
    assert!(s.kept.is_subset(&t.kept));
}

#[test]
fn zero_iteration_partition_collapses_the_loop() {
    let u = unit(multiset_source());
    let cfg = build_cfg(&u);
    let t = truncate(&cfg, &multiset_partition(&cfg, false, false));
    same_program(&to_mini(&t, &cfg, &u.text).unwrap(), "i := 1\nassume(!(i <= n))");
    let s = back_slice(&t, &cfg, &SliceCriterion::vars(["n", "xs"]));
    // The loop test reads `n`, so it survives, and with it `i := 1`.
    same_program(&to_mini(&s, &cfg, &u.text).unwrap(), "i := 1\nassume(!(i <= n))");
}

#[test]
fn full_coverage_truncation_is_the_identity() {
    let u = unit(multiset_source());
    let cfg = build_cfg(&u);
    let t = truncate(&cfg, &multiset_partition(&cfg, true, true));
    let mini = to_mini(&t, &cfg, &u.text).unwrap();
    assert_eq!(mini.normalized(), parse_mini(multiset_source()).unwrap().normalized());
    assert!(t.synth_assumes.is_empty());
    assert!(t.unreachable_marks.is_empty());
}

#[test]
fn independent_assignment_is_dropped() {
    let src = "x := 1\ny := 2";
    let u = unit(src);
    let cfg = build_cfg(&u);
    let parts = gen_partitions(&cfg, PartitionLimits::default());
    let t = truncate(&cfg, &parts.partitions[0]);
    let s = back_slice(&t, &cfg, &SliceCriterion::vars(["y"]));
    same_program(&to_mini(&s, &cfg, src).unwrap(), "y := 2");
    assert_eq!(s.tracked, BTreeSet::from(["y".to_string()]));
}

#[test]
fn uncovered_program_is_vacuous() {
    let u = unit(multiset_source());
    let cfg = build_cfg(&u);
    let tree = truncate_tree(&cfg, &[ENTRY, EXIT].into_iter().collect(), true);
    assert!(tree.is_dead());
}

#[test]
fn empty_branch_outside_loops_becomes_an_assumption() {
    let src = "read(a)\nif (a < 0) {\n  b := 1\n}\nwrite(b)";
    let u = unit(src);
    let cfg = build_cfg(&u);
    let parts = gen_partitions(&cfg, PartitionLimits::default());
    let taken = parts.partitions.iter().find(|p| labels(&cfg, &p.coverage).contains("b := 1")).unwrap();
    let t = truncate(&cfg, taken);
    same_program(&to_mini(&t, &cfg, src).unwrap(), "read(a)\nassume(a < 0)\nb := 1\nwrite(b)");
    let skipped = parts.partitions.iter().find(|p| !labels(&cfg, &p.coverage).contains("b := 1")).unwrap();
    let t = truncate(&cfg, skipped);
    same_program(&to_mini(&t, &cfg, src).unwrap(), "read(a)\nassume(!(a < 0))\nwrite(b)");
}

#[test]
fn dead_code_keeps_its_enclosing_tests() {
    // Unsimplified trees still contain `assume(false)` inside live branches.
    let src = "read(a)\nif (a < 0) {\n  b := 1\n} else {\n  c := 2\n}";
    let u = unit(src);
    let cfg = build_cfg(&u);
    let parts = gen_partitions(&cfg, PartitionLimits::default());
    let p = parts.partitions.iter().find(|p| labels(&cfg, &p.coverage).contains("b := 1")).unwrap();
    let t = truncate_unsimplified(&cfg, p);
    let s = back_slice(&t, &cfg, &SliceCriterion::vars(["b"]));
    same_program(&to_mini(&s, &cfg, src).unwrap(), "read(a)\nif (a < 0) { b := 1 } else { assume(false) }");
}

// Property helpers.

const BOUND: usize = MAX_LOOP_ITERATIONS;

fn reachable(paths: &Unfolding) -> HashSet<Vec<Stmt>> {
    paths
        .paths
        .iter()
        .filter(|p| !p.stmts.iter().any(|s| matches!(&s.kind, StmtKind::Assume(c) if c.expr == BoolExpr::False)))
        .map(|p| p.stmts.clone())
        .collect()
}

fn coverage(cfg: &Cfg, path: &[Stmt]) -> NodeSet {
    let mut cov: NodeSet = [ENTRY, EXIT].into_iter().collect();
    for s in path {
        cov.insert(cfg.node_for_range(Range::new(0, s.span.start, s.span.end)).expect("span maps to a node"));
    }
    cov
}

fn criterion_vars(g: &mut ProgramGen) -> BTreeSet<String> {
    let mut pool: Vec<&str> = INT_VARS.to_vec();
    pool.push(SEQ_VAR);
    pool.into_iter().filter(|_| g.rng().random_bool(0.4)).map(String::from).collect()
}

struct Fuzzed {
    src: String,
    cfg: Cfg,
    parts: PartitionSet,
}

fn fuzzed(seed: u64) -> Fuzzed {
    // `skip` leaves no trace in an unfolded path, so its coverage could not
    // be recovered from the path. A self-assignment does.
    let src = print_stmt(&ProgramGen::new(seed).program()).replace("skip", "l1 := l1");
    let cfg = build_cfg(&unit(&src));
    let parts = gen_partitions(&cfg, PartitionLimits::default());
    Fuzzed { src, cfg, parts }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Every path of the partition survives truncation, and every path of
    /// the truncation is a path of the original program.
    #[test]
    fn truncation_sits_between_partition_and_program(seed in any::<u64>()) {
        let f = fuzzed(seed);
        let original = reachable(&unfold_bounded(&parse_mini(&f.src).unwrap(), BOUND));
        for p in &f.parts.partitions {
            for simplify in [false, true] {
                let t = if simplify { truncate(&f.cfg, p) } else { truncate_unsimplified(&f.cfg, p) };
                let paths = reachable(&unfold_bounded(&to_mini(&t, &f.cfg, &f.src).unwrap(), BOUND));
                for path in original.iter().filter(|q| coverage(&f.cfg, q) == p.coverage) {
                    prop_assert!(paths.contains(path), "lost {:?}", print_path(path));
                }
                for path in &paths {
                    prop_assert!(original.contains(path), "invented {:?}", print_path(path));
                }
                prop_assert!(t.kept.iter().all(|&n| p.coverage.contains(n)));
            }
        }
    }

    /// The rewrite rules keep the reachable paths, shrink the tree and
    /// reach a fixpoint in one pass.
    #[test]
    fn simplification_is_sound_and_idempotent(seed in any::<u64>()) {
        let f = fuzzed(seed);
        for p in &f.parts.partitions {
            let raw = truncate_unsimplified(&f.cfg, p);
            let simp = truncate(&f.cfg, p);
            let a = reachable(&unfold_bounded(&to_mini(&raw, &f.cfg, &f.src).unwrap(), BOUND));
            let b = reachable(&unfold_bounded(&to_mini(&simp, &f.cfg, &f.src).unwrap(), BOUND));
            prop_assert_eq!(a, b);
            prop_assert!(simp.tree.size() <= raw.tree.size());
            prop_assert_eq!(simplify_tree(simp.tree.clone(), &f.cfg), simp.tree);
        }
    }

    /// Whenever the truncation runs to completion, the slice does too and
    /// agrees on the criterion variables.
    #[test]
    fn slice_preserves_criterion_values(seed in any::<u64>()) {
        let f = fuzzed(seed);
        let mut g = ProgramGen::new(seed ^ 0x5eed);
        for p in &f.parts.partitions {
            let vars = criterion_vars(&mut g);
            let t = truncate(&f.cfg, p);
            let s = back_slice(&t, &f.cfg, &SliceCriterion { vars: vars.clone(), anchors: BTreeSet::new() });
            let tm = to_mini(&t, &f.cfg, &f.src).unwrap();
            let sm = to_mini(&s, &f.cfg, &f.src).unwrap();
            for _ in 0..8 {
                let init = g.initial_state();
                let rt = run_concrete(&tm, init.clone(), 10_000);
                if rt.status != Status::Done {
                    continue;
                }
                let rs = run_concrete(&sm, init, 10_000);
                prop_assert_eq!(rs.status, Status::Done, "slice blocked:\n{}", print_stmt(&sm));
                for v in &vars {
                    prop_assert_eq!(rt.env.get(v), rs.env.get(v), "{} differs", v);
                }
            }
        }
    }

    /// Kept nodes are closed under the slicing rules, grow with the
    /// criterion, and equal the truncation when everything is of interest.
    #[test]
    fn slice_is_closed_and_monotone(seed in any::<u64>()) {
        let f = fuzzed(seed);
        let mut g = ProgramGen::new(seed ^ 0xc0ffee);
        let mut everything = parse_mini(&f.src).unwrap().all_vars();
        everything.extend([INPUT_STREAM.to_string(), OUTPUT_STREAM.to_string()]);
        for p in &f.parts.partitions {
            let t = truncate(&f.cfg, p);
            let small = criterion_vars(&mut g);
            let mut large = small.clone();
            large.extend(criterion_vars(&mut g));
            let s1 = back_slice(&t, &f.cfg, &SliceCriterion { vars: small.clone(), anchors: BTreeSet::new() });
            let s2 = back_slice(&t, &f.cfg, &SliceCriterion { vars: large, anchors: BTreeSet::new() });
            prop_assert!(s1.kept.is_subset(&s2.kept));
            prop_assert!(s2.kept.is_subset(&t.kept));
            for &n in &t.kept {
                let node = &f.cfg.nodes[n];
                let is_assume = node.ast.as_ref().is_some_and(|a| a.kind == symslice::frontend::NodeKind::Assume);
                if node.kind == CfgKind::Stmt && !is_assume && !node.defs.is_disjoint(&s1.tracked) {
                    prop_assert!(s1.keeps(n), "node {} writes a tracked variable", node.label);
                }
            }
            for &n in &s1.kept {
                prop_assert!(f.cfg.nodes[n].uses.is_subset(&s1.tracked));
            }
            let all = back_slice(&t, &f.cfg, &SliceCriterion { vars: everything.clone(), anchors: BTreeSet::new() });
            prop_assert_eq!(&all.kept, &t.kept);
        }
    }
}

