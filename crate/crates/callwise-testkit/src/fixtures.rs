//! Hand-checked fixture datasets and their expected count ratios.

use callwise_core::{AttributeSchema, Dataset};

/// The nine-instance call log worked through by hand in the docs and tests:
/// four context attributes, two classes, and enough zero counts to exercise
/// every smoothing path.
pub const TABLE1_ROWS: [(&str, &str, &str, &str, &str); 9] = [
    ("Fri[S1]", "Office", "Meeting", "Friend", "Reject"),
    ("Fri[S1]", "Office", "Meeting", "Colleague", "Reject"),
    ("Fri[S1]", "Office", "Meeting", "Boss", "Accept"),
    ("Fri[S1]", "Office", "Meeting", "Friend", "Reject"),
    ("Fri[S2]", "Home", "Dinner", "Friend", "Accept"),
    ("Wed[S1]", "Office", "Seminar", "Unknown", "Reject"),
    ("Wed[S1]", "Office", "Seminar", "Colleague", "Reject"),
    ("Wed[S1]", "Office", "Seminar", "Mother", "Accept"),
    ("Wed[S2]", "Home", "Dinner", "Unknown", "Accept"),
];

pub fn table1() -> Dataset {
    let schema = AttributeSchema::new(
        vec![
            ("daytime", vec!["Fri[S1]", "Fri[S2]", "Wed[S1]", "Wed[S2]"]),
            ("location", vec!["Office", "Home"]),
            ("situation", vec!["Meeting", "Dinner", "Seminar"]),
            (
                "relationship",
                vec!["Friend", "Colleague", "Boss", "Unknown", "Mother"],
            ),
        ],
        vec!["Reject", "Accept"],
    )
    .unwrap();
    let instances = TABLE1_ROWS
        .iter()
        .map(|&(d, l, s, r, class)| schema.encode_instance(&[d, l, s, r], class).unwrap())
        .collect();
    Dataset::new(schema, instances)
}

/// Expected class priors of [`table1`] as exact count ratios.
pub const TABLE1_PRIORS: [(&str, u64, u64); 2] = [("Reject", 5, 9), ("Accept", 4, 9)];

/// Every unsmoothed conditional of [`table1`]: (attribute, value, class,
/// numerator, denominator). 28 entries, one per (observed value, class).
pub const TABLE1_CONDITIONALS: [(&str, &str, &str, u64, u64); 28] = [
    ("daytime", "Fri[S1]", "Reject", 3, 5),
    ("daytime", "Fri[S1]", "Accept", 1, 4),
    ("daytime", "Fri[S2]", "Reject", 0, 5),
    ("daytime", "Fri[S2]", "Accept", 1, 4),
    ("daytime", "Wed[S1]", "Reject", 2, 5),
    ("daytime", "Wed[S1]", "Accept", 1, 4),
    ("daytime", "Wed[S2]", "Reject", 0, 5),
    ("daytime", "Wed[S2]", "Accept", 1, 4),
    ("location", "Office", "Reject", 5, 5),
    ("location", "Office", "Accept", 2, 4),
    ("location", "Home", "Reject", 0, 5),
    ("location", "Home", "Accept", 2, 4),
    ("situation", "Meeting", "Reject", 3, 5),
    ("situation", "Meeting", "Accept", 1, 4),
    ("situation", "Dinner", "Reject", 0, 5),
    ("situation", "Dinner", "Accept", 2, 4),
    ("situation", "Seminar", "Reject", 2, 5),
    ("situation", "Seminar", "Accept", 1, 4),
    ("relationship", "Friend", "Reject", 2, 5),
    ("relationship", "Friend", "Accept", 1, 4),
    ("relationship", "Colleague", "Reject", 2, 5),
    ("relationship", "Colleague", "Accept", 0, 4),
    ("relationship", "Boss", "Reject", 0, 5),
    ("relationship", "Boss", "Accept", 1, 4),
    ("relationship", "Unknown", "Reject", 1, 5),
    ("relationship", "Unknown", "Accept", 1, 4),
    ("relationship", "Mother", "Reject", 0, 5),
    ("relationship", "Mother", "Accept", 1, 4),
];

/// A 1005-instance single-attribute dataset whose `reject` class has value
/// counts (unknown: 0, friend: 990, mother: 10) over 1000 instances and
/// three observed values overall, so the add-one estimates are exactly
/// 1/1003, 991/1003, and 11/1003.
pub fn laplace_example() -> Dataset {
    let schema = AttributeSchema::new(
        vec![("relationship", vec!["unknown", "friend", "mother"])],
        vec!["reject", "accept"],
    )
    .unwrap();
    let mut instances = Vec::with_capacity(1005);
    for _ in 0..990 {
        instances.push(schema.encode_instance(&["friend"], "reject").unwrap());
    }
    for _ in 0..10 {
        instances.push(schema.encode_instance(&["mother"], "reject").unwrap());
    }
    for _ in 0..5 {
        instances.push(schema.encode_instance(&["unknown"], "accept").unwrap());
    }
    Dataset::new(schema, instances)
}

/// Expected add-one conditionals of [`laplace_example`] for class `reject`.
pub const LAPLACE_EXPECTED: [(&str, u64, u64, f64); 3] = [
    ("unknown", 1, 1003, 0.001),
    ("friend", 991, 1003, 0.988),
    ("mother", 11, 1003, 0.011),
];

/// The seven reference rules the `office_worker` persona encodes, as
/// (antecedent pairs, class). Antecedents are ordered root-first the way the
/// learner emits them: location, then situation, then relationship.
pub fn reference_rules() -> Vec<(Vec<(&'static str, &'static str)>, &'static str)> {
    vec![
        (vec![("location", "Home"), ("relationship", "Unknown")], "Missed"),
        (vec![("location", "Home"), ("relationship", "Friend")], "Accept"),
        (
            vec![
                ("location", "Office"),
                ("situation", "Meeting"),
                ("relationship", "Colleague"),
            ],
            "Reject",
        ),
        (
            vec![
                ("location", "Office"),
                ("situation", "Meeting"),
                ("relationship", "Boss"),
            ],
            "Accept",
        ),
        (vec![("location", "Office"), ("situation", "Lecture")], "Reject"),
        (
            vec![
                ("location", "Office"),
                ("situation", "Lunch"),
                ("relationship", "Unknown"),
            ],
            "Missed",
        ),
        (
            vec![
                ("location", "Office"),
                ("situation", "Lunch"),
                ("relationship", "Friend"),
            ],
            "Accept",
        ),
    ]
}
