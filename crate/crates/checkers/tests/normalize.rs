use std::collections::BTreeMap;

use slin_checkers::example::{jointly_producible, leaf_history, printed_leaf_images, tree};
use slin_checkers::{
    check_normal_form, check_strong_lin, normalize_witness, validate_witness,
    witness_from_leaf_images,
};
use slin_engine::scenarios::three_writers;
use slin_history::{History, ObjectId, SeqSpec};

const LIMIT: usize = 1_000_000;

fn specs() -> BTreeMap<ObjectId, SeqSpec> {
    leaf_history(0).specs()
}

/// Compact rendering: process name initial, "cf" plus outcome for flips.
fn render(h: &History) -> Vec<String> {
    h.operations()
        .iter()
        .map(|op| {
            let who = ["p", "q", "r"][op.process.index()];
            if op.is_flip() {
                format!("cf{}", op.ret.as_ref().and_then(|v| v.as_int()).unwrap())
            } else {
                who.to_string()
            }
        })
        .collect()
}

fn leaf_images(w: &slin_checkers::Witness) -> Vec<History> {
    let t = tree();
    t.leaves()
        .iter()
        .map(|v| w.image(*v).unwrap().clone())
        .collect()
}

#[test]
fn printed_images_extend_to_a_valid_witness() {
    let t = tree();
    assert_eq!(t.leaves().len(), 2);
    assert!(t.branches_at_flips());
    let w = witness_from_leaf_images(&t, &printed_leaf_images(&t), &specs()).unwrap();
    validate_witness(&t, &w, &specs()).unwrap();
    assert!(check_strong_lin(&t, &specs()).unwrap().is_some());
    // the flip trails p in one branch although p does not precede it
    assert!(check_normal_form(&t, &w).is_err());
}

#[test]
fn printed_images_are_not_jointly_producible() {
    let t = tree();
    let printed: Vec<History> = printed_leaf_images(&t).into_values().collect();
    assert!(!jointly_producible(&three_writers(), &printed, LIMIT).unwrap());
}

#[test]
fn normalization_moves_the_flip_behind_r() {
    let t = tree();
    let w = witness_from_leaf_images(&t, &printed_leaf_images(&t), &specs()).unwrap();
    let n = normalize_witness(&t, &w, &specs()).unwrap();
    validate_witness(&t, &n, &specs()).unwrap();
    check_normal_form(&t, &n).unwrap();
    let mut got: Vec<Vec<String>> = leaf_images(&n).iter().map(render).collect();
    got.sort();
    assert_eq!(
        got,
        vec![vec!["r", "cf0", "p", "q"], vec!["r", "cf1", "q", "p"]]
    );
    assert!(jointly_producible(&three_writers(), &leaf_images(&n), LIMIT).unwrap());
}

#[test]
fn pending_flip_stays_out_of_the_image() {
    let t = tree();
    let w = witness_from_leaf_images(&t, &printed_leaf_images(&t), &specs()).unwrap();
    let n = normalize_witness(&t, &w, &specs()).unwrap();
    // the node ending with the flip invocation
    let g = t.locate(&leaf_history(0).prefix(5)).unwrap();
    assert_eq!(render(n.image(g).unwrap()), vec!["r"]);
    assert_eq!(normalize_witness(&t, &n, &specs()).unwrap(), n);
}
