//! Every case of both fix-up tables, driven on the smallest tree that
//! exhibits it, in both orientations.

use bucket_rbtree::FixupCase::{self, *};
use bucket_rbtree::{Config, Layout, OutcomeKind, Tree};

fn l() -> Layout {
    Layout::leaf(1)
}

fn b(left: Layout, right: Layout) -> Layout {
    Layout::black(left, right)
}

fn r(left: Layout, right: Layout) -> Layout {
    Layout::red(left, right)
}

/// A black subtree of black height 3 with no violations.
fn tall() -> Layout {
    b(b(l(), l()), b(l(), l()))
}

enum Fix {
    DoubleRed,
    DoublyBlack,
}

struct Case {
    before: Layout,
    at: &'static str,
    fix: Fix,
    after: Layout,
    cases: Vec<FixupCase>,
    kind: OutcomeKind,
}

fn mirror_path(p: &str) -> String {
    p.chars().map(|c| if c == 'L' { 'R' } else { 'L' }).collect()
}

fn check(case: &Case, mirrored: bool) {
    let (before, after, path) = if mirrored {
        (case.before.mirror(), case.after.mirror(), mirror_path(case.at))
    } else {
        (case.before.clone(), case.after.clone(), case.at.to_string())
    };
    let mut tree = Tree::from_layout(&before, Config::default());
    let expected = Tree::from_layout(&after, Config::default()).render();
    let at = tree.node_at(&path).expect("path exists");
    let out = match case.fix {
        Fix::DoubleRed => tree.double_red_fixup(at.internal().expect("internal node")),
        Fix::DoublyBlack => tree.doubly_black_fixup(at),
    }
    .expect("fix-up succeeds");
    let side = if mirrored { "mirrored" } else { "as drawn" };
    assert_eq!(tree.render(), expected, "{side}");
    assert_eq!(out.cases().collect::<Vec<_>>(), case.cases, "{side}");
    assert_eq!(out.kind, case.kind, "{side}");
    // one-key buckets are far below the size floor; everything else must hold
    let report = tree.validate();
    let bad: Vec<_> = report.violations.iter().filter(|v| v.rule != "bucket-size").collect();
    assert!(bad.is_empty(), "{side}: {bad:?}");
}

fn check_both(case: Case) {
    check(&case, false);
    check(&case, true);
}

#[test]
fn double_red_case_1() {
    check_both(Case {
        before: b(b(r(r(l(), l()), l()), r(l(), l())), b(l(), l())),
        at: "LLL",
        fix: Fix::DoubleRed,
        after: b(r(b(r(l(), l()), l()), b(l(), l())), b(l(), l())),
        cases: vec![DoubleRed1],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn double_red_case_1_keeps_root_black() {
    check_both(Case {
        before: b(r(r(l(), l()), l()), r(l(), l())),
        at: "LL",
        fix: Fix::DoubleRed,
        after: b(b(r(l(), l()), l()), b(l(), l())),
        cases: vec![DoubleRed1],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn double_red_case_1_propagates_under_red_parent() {
    // G's parent is red, so recoloring G red creates a pair two levels up
    check_both(Case {
        before: b(r(b(r(r(l(), l()), l()), r(l(), l())), b(l(), l())), b(l(), l())),
        at: "LLLL",
        fix: Fix::DoubleRed,
        after: b(r(r(b(r(l(), l()), l()), b(l(), l())), b(l(), l())), b(l(), l())),
        cases: vec![DoubleRed1],
        kind: OutcomeKind::PropagatedToGrandparent,
    });
}

#[test]
fn double_red_case_1_1() {
    check_both(Case {
        before: b(b(r(r(l(), l()), l()), r(l(), l())).db(), tall()),
        at: "LLL",
        fix: Fix::DoubleRed,
        after: b(b(b(r(l(), l()), l()), b(l(), l())), tall()),
        cases: vec![DoubleRed1_1],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn double_red_case_2_then_3() {
    check_both(Case {
        before: b(r(l(), r(l(), l())), l()),
        at: "LR",
        fix: Fix::DoubleRed,
        after: b(r(l(), l()), r(l(), l())),
        cases: vec![DoubleRed2, DoubleRed3],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn double_red_case_3() {
    check_both(Case {
        before: b(r(r(l(), l()), l()), l()),
        at: "LL",
        fix: Fix::DoubleRed,
        after: b(r(l(), l()), r(l(), l())),
        cases: vec![DoubleRed3],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn double_red_case_3_1() {
    check_both(Case {
        before: b(b(r(r(l(), l()), l()), l()).db(), tall()),
        at: "LLL",
        fix: Fix::DoubleRed,
        after: b(b(r(l(), l()), r(l(), l())).db(), tall()),
        cases: vec![DoubleRed3_1],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_1() {
    check_both(Case {
        before: b(l().db(), r(b(l(), l()), b(l(), l()))),
        at: "L",
        fix: Fix::DoublyBlack,
        after: b(b(l(), r(l(), l())), b(l(), l())),
        cases: vec![DoublyBlack1, DoublyBlack2a],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_1_repeated() {
    // the new sibling after the first rotation is red as well
    check_both(Case {
        before: b(l().db(), r(r(b(l(), l()), b(l(), l())), b(l(), l()))),
        at: "L",
        fix: Fix::DoublyBlack,
        after: b(r(b(l(), r(l(), l())), b(l(), l())), b(l(), l())),
        cases: vec![DoublyBlack1, DoublyBlack1_1, DoublyBlack2a],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_1_1() {
    check_both(Case {
        before: b(r(l().db(), r(b(l(), l()), b(l(), l()))), b(l(), l())),
        at: "LL",
        fix: Fix::DoublyBlack,
        after: b(r(b(l(), r(l(), l())), b(l(), l())), b(l(), l())),
        cases: vec![DoublyBlack1_1, DoublyBlack2a],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_1_2a() {
    check_both(Case {
        before: b(r(l().db(), l().db()), b(l(), l())),
        at: "LL",
        fix: Fix::DoublyBlack,
        after: b(b(l(), l()), b(l(), l())),
        cases: vec![DoublyBlack1_2a],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_1_2b() {
    check_both(Case {
        before: b(b(l().db(), l().db()), tall()),
        at: "LL",
        fix: Fix::DoublyBlack,
        after: b(b(l(), l()).db(), tall()),
        cases: vec![DoublyBlack1_2b],
        kind: OutcomeKind::PropagatedToParent,
    });
}

#[test]
fn doubly_black_case_2a() {
    check_both(Case {
        before: b(r(l().db(), b(l(), l())), b(l(), l())),
        at: "LL",
        fix: Fix::DoublyBlack,
        after: b(b(l(), r(l(), l())), b(l(), l())),
        cases: vec![DoublyBlack2a],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_2b() {
    check_both(Case {
        before: b(b(l().db(), b(l(), l())), tall()),
        at: "LL",
        fix: Fix::DoublyBlack,
        after: b(b(l(), r(l(), l())).db(), tall()),
        cases: vec![DoublyBlack2b],
        kind: OutcomeKind::PropagatedToParent,
    });
}

#[test]
fn doubly_black_case_2b_at_root_absorbs_deficit() {
    check_both(Case {
        before: b(l().db(), b(l(), l())),
        at: "L",
        fix: Fix::DoublyBlack,
        after: b(l(), r(l(), l())),
        cases: vec![DoublyBlack2b],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_3_then_4() {
    check_both(Case {
        before: b(l().db(), b(r(l(), l()), l())),
        at: "L",
        fix: Fix::DoublyBlack,
        after: b(b(l(), l()), b(l(), l())),
        cases: vec![DoublyBlack3, DoublyBlack4],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn doubly_black_case_4() {
    check_both(Case {
        before: b(l().db(), b(l(), r(l(), l()))),
        at: "L",
        fix: Fix::DoublyBlack,
        after: b(b(l(), l()), b(l(), l())),
        cases: vec![DoublyBlack4],
        kind: OutcomeKind::Resolved,
    });
}

#[test]
fn render_shows_separators_and_flags() {
    let tree = Tree::from_layout(&b(r(l().db(), l()), l()), Config::default());
    assert_eq!(tree.render(), "B:2(R:1([1]!,[2]),[3])");
}

#[test]
fn dispatcher_moves_cursor_to_post_rotation_parent() {
    // bucket 0 sits under the red-red pair; its step runs Case 3 at the pair's
    // lower node and then targets that node's new parent, the new root
    let mut tree = Tree::from_layout(&b(r(r(l(), l()), l()), l()), Config::default());
    let first = tree.bucket_ids()[0];
    let n = tree.node_at("LL").unwrap();
    tree.set_bucket_cursor(first, n);
    let out = tree.fixup_step(first).unwrap();
    assert_eq!(out.cases().collect::<Vec<_>>(), vec![DoubleRed3]);
    assert_eq!(tree.cursor_of(first), tree.node_at("").unwrap());
    // at the root a step is a no-op
    let again = tree.fixup_step(first).unwrap();
    assert_eq!(again.kind, OutcomeKind::NoViolation);
    assert_eq!(tree.cursor_of(first), tree.root());
}

#[test]
fn third_case_1_repetition_is_a_contract_error() {
    // three red siblings in a row, stacked along the inner spine
    let red_spine = r(r(r(b(l(), l()), b(l(), l())), b(l(), l())), b(l(), l()));
    let drawn = b(l().db(), red_spine);
    for (layout, path) in [(drawn.clone(), "L"), (drawn.mirror(), "R")] {
        let mut tree = Tree::from_layout(&layout, Config::default());
        let at = tree.node_at(path).unwrap();
        let err = tree.doubly_black_fixup(at).unwrap_err();
        assert!(matches!(err, bucket_rbtree::TreeError::Contract(_)), "{err}");
    }
}
