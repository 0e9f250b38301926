//! Decision-tree behavior on known data: gain-ratio agreement on the
//! nine-instance fixture and full recovery of the office-worker context
//! rules from clean generated data.

use callwise_core::synth::{bundled_persona, generate};
use callwise_core::tree::{build_tree, gain_ratio, TreeParams};
use callwise_testkit::fixtures::{reference_rules, table1};
use callwise_testkit::oracle::gain_ratio_oracle;

#[test]
fn fixture_gain_ratios_match_the_reference_recomputation() {
    let ds = table1();
    for attr in 0..ds.schema().attr_count() {
        let got = gain_ratio(&ds, attr).unwrap();
        let want = gain_ratio_oracle(&ds, attr);
        assert!((got - want).abs() < 1e-12, "attr {attr}: {got} vs {want}");
    }
}

#[test]
fn office_worker_tree_recovers_every_reference_rule() {
    let persona = bundled_persona("office_worker").unwrap();
    let (ds, mask) = generate(&persona, 2000, 0.0, 1).unwrap();
    assert!(mask.flips.is_empty());

    let tree = build_tree(&ds, TreeParams::default()).unwrap();
    // Location splits the root, situation the office branch, relationship
    // the rest: three levels, 2 + 1 + 10 leaves.
    assert_eq!(tree.depth(), 3);
    assert_eq!(tree.leaf_count(), 13);

    let schema = ds.schema();
    let rules = tree.extract_rules();
    assert_eq!(rules.len(), 13);
    assert_eq!(rules.iter().map(|r| r.support).sum::<usize>(), ds.len());

    let named: Vec<(Vec<(&str, &str)>, &str)> = rules
        .iter()
        .map(|rule| {
            let ante = rule
                .antecedent
                .iter()
                .map(|&(attr, value)| {
                    (
                        schema.attribute_name(attr),
                        schema.value_name(attr, value).unwrap(),
                    )
                })
                .collect();
            (ante, schema.class_name(rule.class))
        })
        .collect();
    for (want_ante, want_class) in reference_rules() {
        let found = named
            .iter()
            .find(|(ante, _)| *ante == want_ante)
            .unwrap_or_else(|| panic!("no extracted rule with antecedent {want_ante:?}"));
        assert_eq!(found.1, want_class, "class for {want_ante:?}");
    }
}

#[test]
fn extracted_rules_replay_the_tree_on_training_data() {
    let persona = bundled_persona("night_owl").unwrap();
    let (ds, _) = generate(&persona, 600, 0.08, 7).unwrap();
    let tree = build_tree(&ds, TreeParams::default()).unwrap();
    let rules = tree.extract_rules();
    for inst in ds.instances() {
        let by_tree = tree.predict(&inst.values);
        let by_rule = rules
            .iter()
            .find(|r| {
                r.antecedent
                    .iter()
                    .all(|&(attr, value)| inst.values[attr] == value)
            })
            .expect("training instances always reach a leaf");
        assert_eq!(by_tree, by_rule.class);
    }
}

#[test]
fn tree_construction_is_deterministic() {
    let persona = bundled_persona("screener").unwrap();
    let (ds, _) = generate(&persona, 400, 0.1, 3).unwrap();
    let a = build_tree(&ds, TreeParams::default()).unwrap();
    let b = build_tree(&ds, TreeParams::default()).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}
