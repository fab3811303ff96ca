// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{multiset_source, fixture, ProgramGen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use symslice::frontend::*;
use symslice::mini_lang::print_stmt;

fn parse(src: &str, lang: Language) -> SourceUnit {
    parse_unit(src.as_bytes(), lang, 0).expect("adapter registered")
}

fn kinds(n: &UnifiedNode) -> Vec<NodeKind> {
    n.children.iter().map(|c| c.kind).collect()
}

fn first_if(n: &UnifiedNode) -> Option<&UnifiedNode> {
    let mut found = None;
    n.walk(&mut |m| {
        if found.is_none() && m.kind == NodeKind::If {
            found = Some(m);
        }
    });
    found
}

#[test]
fn mini_if_then_else_has_three_children() {
    let unit = parse("if (a < b) {\n  a := 1\n} else {\n  a := 2\n}\n", Language::Mini);
    let node = first_if(&unit.root).unwrap();
    assert_eq!(kinds(node), [NodeKind::ConditionExpr, NodeKind::Block, NodeKind::Block]);
    assert_eq!(unit.node_text(&node.children[0]), "a < b");
}

#[test]
fn if_else_unifies_across_languages() {
    let sources = [
        (Language::Mini, "if (x > 0) {\n  y := 1\n} else {\n  y := 2\n}\n"),
        (Language::Python, "if x > 0:\n    y = 1\nelse:\n    y = 2\n"),
        (Language::C, "void f(int x) {\n  if (x > 0) {\n    y = 1;\n  } else {\n    y = 2;\n  }\n}\n"),
    ];
    for (lang, src) in sources {
        let unit = parse(src, lang);
        let node = first_if(&unit.root).unwrap_or_else(|| panic!("{lang:?}: no if"));
        assert_eq!(kinds(node), [NodeKind::ConditionExpr, NodeKind::Block, NodeKind::Block], "{lang:?}");
        assert_eq!(unit.node_text(&node.children[0]), "x > 0", "{lang:?}");
        for block in &node.children[1..] {
            assert_eq!(kinds(block), [NodeKind::Assignment], "{lang:?}");
        }
    }
}

#[test]
fn empty_file_has_empty_root() {
    for lang in [Language::Mini, Language::Python, Language::C] {
        let unit = parse("", lang);
        assert_eq!(unit.root.kind, NodeKind::Block);
        assert!(unit.root.children.is_empty(), "{lang:?}");
    }
}

#[test]
fn noise_becomes_single_other_node() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    for _ in 0..50 {
        let len = rng.random_range(1..60);
        let noise: String = (0..len).map(|_| rng.random_range(0x21u8..0x7f) as char).collect();
        let unit = parse(&noise, Language::Mini);
        if symslice::mini_lang::parse_syntax(&noise).is_ok() {
            continue;
        }
        failures += 1;
        assert_eq!(unit.root.children.len(), 1, "{noise:?}");
        let only = &unit.root.children[0];
        assert_eq!(only.kind, NodeKind::Other);
        assert_eq!(unit.node_text(only), noise);
    }
    assert!(failures > 40);
}

#[test]
fn invalid_utf8_is_unreadable() {
    let err = parse_unit(&[0xff, 0xfe, 0x00], Language::C, 0).unwrap_err();
    assert!(matches!(err, FrontendError::Unreadable(_)));
}

#[test]
fn unknown_language_tag_is_rejected() {
    assert!(matches!(Language::from_tag("cobol"), Err(FrontendError::UnknownLanguage(_))));
    assert_eq!(Language::from_tag("py").unwrap(), Language::Python);
    assert_eq!(Language::from_path(std::path::Path::new("a/b.c")).unwrap(), Language::C);
    let empty = AdapterRegistry::empty();
    assert!(parse_unit_with(&empty, b"x := 1", Language::Mini, 0).is_err());
}

#[test]
fn rounding_annotations() {
    let unit = parse(&fixture("closest_integer.py"), Language::Python);
    let ann = extract_annotations(&unit).unwrap();
    assert_eq!(ann.pre_condition().as_deref(), Some("len(value) > 0"));
    assert_eq!(ann.post_condition(), Some("abs(res) <= abs(float(value))"));
    let stmt = ann.pre[0].statement.unwrap();
    assert_eq!(&unit.text[stmt.start..stmt.end], "assume len(value) > 0");
}

#[test]
fn comment_only_annotations_in_c() {
    let unit = parse(&fixture("xinput.c"), Language::C);
    let ann = extract_annotations(&unit).unwrap();
    assert_eq!(ann.pre_condition().as_deref(), Some("true"));
    assert_eq!(ann.post_condition(), Some("info != NULL"));
}

#[test]
fn no_markers_yields_empty_annotations() {
    let unit = parse(multiset_source(), Language::Mini);
    let ann = extract_annotations(&unit).unwrap();
    assert!(ann.pre.is_empty());
    assert!(ann.post.is_none());
}

#[test]
fn conflicting_post_markers_are_rejected() {
    let src = "def f(x):\n    assert x > 0  # POST\n    assert x < 9  # POST\n";
    let err = extract_annotations(&parse(src, Language::Python)).unwrap_err();
    assert!(matches!(err, AnnotationError::ConflictingPost { .. }));
    let same = "def f(x):\n    assert x > 0  # POST\n    assert x >  0  # POST\n";
    assert!(extract_annotations(&parse(same, Language::Python)).is_ok());
}

#[test]
fn rounding_structure() {
    let unit = parse(&fixture("closest_integer.py"), Language::Python);
    assert_eq!(unit.error_nodes(), 0);
    let f = unit.functions();
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].name_hint.as_deref(), Some("closest_integer"));
    let body = &f[0].children[0];
    let stmts: Vec<NodeKind> = body.children.iter().map(|c| c.kind).filter(|k| *k != NodeKind::Comment).collect();
    assert_eq!(stmts, [NodeKind::Assume, NodeKind::If, NodeKind::Assignment, NodeKind::If, NodeKind::Call]);
    // The elif chain nests as an `if` in the else position.
    let second = body.children.iter().filter(|c| c.kind == NodeKind::If).nth(1).unwrap();
    assert_eq!(kinds(second), [NodeKind::ConditionExpr, NodeKind::Block, NodeKind::If]);
    // The trailing POST comment stays inside the function.
    assert!(unit.node_text(f[0]).ends_with("# POST"));
}

#[test]
fn c_for_loop_children() {
    let unit = parse(&fixture("kvserver.c"), Language::C);
    assert_eq!(unit.error_nodes(), 0);
    let mut fors = Vec::new();
    unit.root.walk(&mut |n| {
        if n.kind == NodeKind::For {
            fors.push(n)
        }
    });
    assert_eq!(fors.len(), 1);
    let roles: Vec<Role> = fors[0].children.iter().map(|c| c.role).collect();
    assert_eq!(roles, [Role::ForInit, Role::Plain, Role::ForUpdate, Role::Plain]);
    assert_eq!(unit.node_text(&fors[0].children[1]), "n != NULL");
    assert_eq!(unit.node_text(&fors[0].children[2]), "p = n, n = n->next");
}

#[test]
fn c_top_level_declarations_are_indexed() {
    let unit = parse(&fixture("kvserver.c"), Language::C);
    for name in ["SIZE", "NODE", "db", "mutx", "handle_client"] {
        assert!(unit.symbol_index.contains_key(name), "{name}");
    }
    let unit = parse(&fixture("xinput.c"), Language::C);
    for name in ["XIQueryDevice", "XIFreeDeviceInfo", "list_xi2"] {
        assert!(unit.symbol_index.contains_key(name), "{name}");
    }
}

#[test]
fn c_def_use_of_declarations_and_calls() {
    let unit = parse("void f() {\n  char a[N] = {0}, b[N];\n  g(&a, b, c + 1);\n}\n", Language::C);
    let stmts = unit.functions()[0].children[0].children.clone();
    let decl = unit.def_use(&stmts[0]);
    assert_eq!(decl.defs.into_iter().collect::<Vec<_>>(), ["a", "b"]);
    assert!(decl.uses.contains("N"));
    let call = unit.def_use(&stmts[1]);
    assert!(call.defs.contains("a") && call.defs.contains("b") && !call.defs.contains("c"));
    assert!(call.uses.contains("g") && call.uses.contains("c"));
}

#[test]
fn python_def_use() {
    let unit = parse("x = y + 1\nxs.append(x)\nz: int = 3\n", Language::Python);
    let du: Vec<DefUse> = unit.root.children.iter().map(|n| unit.def_use(n)).collect();
    assert!(du[0].defs.contains("x") && du[0].uses.contains("y") && !du[0].uses.contains("x"));
    assert!(du[1].defs.contains("xs") && du[1].uses.contains("x"), "{:?} {:?}", du, unit.root);
    assert!(du[2].defs.contains("z"));
}

#[test]
fn mini_def_use_tracks_streams() {
    let unit = parse("read(x)\nwrite(x + y)\n", Language::Mini);
    let r = unit.def_use(&unit.root.children[0]);
    assert!(r.defs.contains("x") && r.defs.contains(INPUT_STREAM));
    let w = unit.def_use(&unit.root.children[1]);
    assert!(w.defs.contains(OUTPUT_STREAM) && w.uses.contains("y"));
}

#[test]
fn negated_assume_flips_single_comparisons() {
    let reg = AdapterRegistry::default();
    let py = reg.get(Language::Python).unwrap();
    assert_eq!(py.assume_text("value[-2:] == '.5'", false), "assume value[-2:] != '.5'");
    assert_eq!(py.assume_text("a or b", false), "assume not (a or b)");
    let c = reg.get(Language::C).unwrap();
    assert_eq!(c.assume_text("r <= 0", false), "assume(r > 0);");
    assert_eq!(c.assume_text("a && b", false), "assume(!(a && b));");
    let mini = reg.get(Language::Mini).unwrap();
    assert_eq!(mini.assume_text("x < 0", false), "assume(!(x < 0))");
}

fn check_index(unit: &SourceUnit) {
    unit.root.walk(&mut |n| {
        if let (NodeKind::Declaration | NodeKind::FunctionDef, Some(name)) = (n.kind, &n.name_hint) {
            assert!(unit.symbol_index[name].iter().any(|d| d.range == n.range), "{name}");
        }
    });
}

#[test]
fn fixtures_satisfy_range_and_index_invariants() {
    for (name, lang) in [("multiset.mini", Language::Mini), ("closest_integer.py", Language::Python), ("kvserver.c", Language::C), ("xinput.c", Language::C)] {
        let unit = parse(&fixture(name), lang);
        unit.root.check_ranges().unwrap_or_else(|e| panic!("{name}: {e}"));
        check_index(&unit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fuzzed_mini_programs_satisfy_range_invariants(seed in any::<u64>()) {
        let src = print_stmt(&ProgramGen::new(seed).program());
        let unit = parse(&src, Language::Mini);
        prop_assert_eq!(unit.error_nodes(), 0);
        prop_assert!(unit.root.check_ranges().is_ok());
        check_index(&unit);
    }

    #[test]
    fn arbitrary_text_never_breaks_range_invariants(src in "[ -~\n]{0,120}") {
        for lang in [Language::Mini, Language::Python, Language::C] {
            let unit = parse(&src, lang);
            prop_assert!(unit.root.check_ranges().is_ok(), "{:?} {:?}", lang, unit.root.check_ranges());
            check_index(&unit);
        }
    }
}
