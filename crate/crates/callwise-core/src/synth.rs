//! Persona-driven synthetic dataset generation with controlled label
//! noise and an exact ground-truth mask.
//!
//! A persona is a total function from context to behavior class, written
//! as a priority-ordered rule list (first match wins) plus per-value
//! sampling weights. Generation samples contexts from the weights, labels
//! them by the rules, then flips an exact count of labels to uniformly
//! chosen wrong classes. The mask records every flip, so tests can score
//! the mislabel detector against known ground truth.
//!
//! Everything here is a pure function of (persona, n, noise_rate, seed).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AttrIndex, AttributeSchema, ClassId, Dataset, Instance, ValueCode};

/// Cells enumerated when proving a persona total; guards against schemas
/// whose context product space is too large to check exhaustively.
const MAX_PRODUCT_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextRule {
    /// (attribute, value) tests, all of which must hold. Empty matches
    /// everything, so a final catch-all rule guarantees totality.
    pub conditions: Vec<(AttrIndex, ValueCode)>,
    pub class: ClassId,
}

impl ContextRule {
    pub fn matches(&self, context: &[ValueCode]) -> bool {
        self.conditions
            .iter()
            .all(|&(attr, value)| context[attr] == value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PersonaError {
    #[error("rule {rule} references unknown attribute {attribute:?}")]
    UnknownAttribute { rule: usize, attribute: String },
    #[error("rule {rule} references unknown value {value:?} for attribute {attribute:?}")]
    UnknownValue {
        rule: usize,
        attribute: String,
        value: String,
    },
    #[error("rule {rule} references unknown class {class:?}")]
    UnknownClass { rule: usize, class: String },
    #[error("rule {rule} tests attribute {attribute:?} twice")]
    DuplicateCondition { rule: usize, attribute: String },
    #[error("no rule covers the context {example:?}")]
    NotTotal { example: Vec<String> },
    #[error("context product space exceeds the totality-check limit")]
    ProductTooLarge,
    #[error("unknown attribute {0:?}")]
    UnknownWeightAttribute(String),
    #[error("weights must list every domain value of {attribute:?} exactly once")]
    IncompleteWeights { attribute: String },
    #[error("attribute {attribute:?} has no sampleable value (all weights zero)")]
    ZeroWeightSum { attribute: String },
}

/// A synthetic user: a named, total context-to-behavior rule function and
/// the sampling distribution of its contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Persona {
    name: String,
    schema: AttributeSchema,
    rules: Vec<ContextRule>,
    /// Per attribute, one sampling weight per domain value.
    weights: Vec<Vec<u32>>,
}

impl Persona {
    /// Builds a persona from named rules, checking each rule against the
    /// schema and proving the rule list total by exhaustive enumeration.
    /// Sampling weights start uniform.
    pub fn new(
        name: &str,
        schema: AttributeSchema,
        rule_specs: &[(Vec<(&str, &str)>, &str)],
    ) -> Result<Self, PersonaError> {
        let mut rules = Vec::with_capacity(rule_specs.len());
        for (rule_idx, (conditions, class)) in rule_specs.iter().enumerate() {
            let mut encoded = Vec::with_capacity(conditions.len());
            for &(attr_name, value_name) in conditions {
                let attr = schema
                    .attribute_names()
                    .position(|n| n == attr_name)
                    .ok_or_else(|| PersonaError::UnknownAttribute {
                        rule: rule_idx,
                        attribute: attr_name.into(),
                    })?;
                if encoded.iter().any(|&(a, _)| a == attr) {
                    return Err(PersonaError::DuplicateCondition {
                        rule: rule_idx,
                        attribute: attr_name.into(),
                    });
                }
                let value = schema.encode_value(attr, value_name);
                if value.is_out_of_domain() {
                    return Err(PersonaError::UnknownValue {
                        rule: rule_idx,
                        attribute: attr_name.into(),
                        value: value_name.into(),
                    });
                }
                encoded.push((attr, value));
            }
            let class = schema.class_id(class).ok_or_else(|| PersonaError::UnknownClass {
                rule: rule_idx,
                class: (*class).into(),
            })?;
            rules.push(ContextRule {
                conditions: encoded,
                class,
            });
        }

        let weights = (0..schema.attr_count())
            .map(|a| vec![1u32; schema.domain_size(a)])
            .collect();
        let persona = Self {
            name: name.into(),
            schema,
            rules,
            weights,
        };
        persona.check_total()?;
        Ok(persona)
    }

    /// Replaces one attribute's sampling weights. The slice must name
    /// every domain value exactly once; individual zeros are allowed as
    /// long as something remains sampleable.
    pub fn with_weights(
        mut self,
        attribute: &str,
        weights: &[(&str, u32)],
    ) -> Result<Self, PersonaError> {
        let attr = self
            .schema
            .attribute_names()
            .position(|n| n == attribute)
            .ok_or_else(|| PersonaError::UnknownWeightAttribute(attribute.into()))?;
        let domain_size = self.schema.domain_size(attr);
        let mut table = vec![None; domain_size];
        for &(value_name, weight) in weights {
            let value = self.schema.encode_value(attr, value_name);
            if value.is_out_of_domain() || table[value.index()].is_some() {
                return Err(PersonaError::IncompleteWeights {
                    attribute: attribute.into(),
                });
            }
            table[value.index()] = Some(weight);
        }
        if table.iter().any(Option::is_none) {
            return Err(PersonaError::IncompleteWeights {
                attribute: attribute.into(),
            });
        }
        let resolved: Vec<u32> = table.into_iter().map(Option::unwrap).collect();
        if resolved.iter().all(|&w| w == 0) {
            return Err(PersonaError::ZeroWeightSum {
                attribute: attribute.into(),
            });
        }
        self.weights[attr] = resolved;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn rules(&self) -> &[ContextRule] {
        &self.rules
    }

    /// First matching rule's class. Totality is proven at construction,
    /// so every in-domain context matches.
    pub fn label(&self, context: &[ValueCode]) -> ClassId {
        self.rules
            .iter()
            .find(|rule| rule.matches(context))
            .expect("persona rules are total")
            .class
    }

    fn check_total(&self) -> Result<(), PersonaError> {
        let mut cells = 1usize;
        for a in 0..self.schema.attr_count() {
            cells = cells
                .checked_mul(self.schema.domain_size(a))
                .filter(|&c| c <= MAX_PRODUCT_CELLS)
                .ok_or(PersonaError::ProductTooLarge)?;
        }
        let mut context = vec![ValueCode(0); self.schema.attr_count()];
        for mut cell in 0..cells {
            for a in 0..self.schema.attr_count() {
                let size = self.schema.domain_size(a);
                context[a] = ValueCode((cell % size) as u16);
                cell /= size;
            }
            if !self.rules.iter().any(|rule| rule.matches(&context)) {
                let example = context
                    .iter()
                    .enumerate()
                    .map(|(a, &v)| String::from(self.schema.value_name(a, v).unwrap()))
                    .collect();
                return Err(PersonaError::NotTotal { example });
            }
        }
        Ok(())
    }
}

/// Ground truth for injected label noise: which instances were flipped and
/// what they said before.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMask {
    /// (instance id, pre-flip label), ascending by id. The stored label
    /// always differs from the instance's current label.
    pub flips: Vec<(usize, ClassId)>,
    pub requested_rate: f64,
    pub realized_rate: f64,
}

impl NoiseMask {
    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.flips.binary_search_by_key(&id, |&(i, _)| i).is_ok()
    }

    pub fn original_label(&self, id: usize) -> Option<ClassId> {
        self.flips
            .binary_search_by_key(&id, |&(i, _)| i)
            .ok()
            .map(|idx| self.flips[idx].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SynthError {
    #[error("cannot generate an empty dataset")]
    EmptyRequest,
    #[error("noise rate {0} is outside [0, 1)")]
    InvalidNoiseRate(f64),
}

fn sample_value(rng: &mut ChaCha8Rng, weights: &[u32]) -> ValueCode {
    let total: u32 = weights.iter().sum();
    let mut draw = rng.random_range(0..total);
    for (idx, &w) in weights.iter().enumerate() {
        if draw < w {
            return ValueCode(idx as u16);
        }
        draw -= w;
    }
    unreachable!("draw below total weight")
}

/// Samples `n` labeled instances from the persona and flips exactly
/// `floor(noise_rate * n)` labels, each to a uniformly chosen different
/// class. Returns the dataset and the exact flip mask.
pub fn generate(
    persona: &Persona,
    n: usize,
    noise_rate: f64,
    seed: u64,
) -> Result<(Dataset, NoiseMask), SynthError> {
    if n == 0 {
        return Err(SynthError::EmptyRequest);
    }
    if !(0.0..1.0).contains(&noise_rate) {
        return Err(SynthError::InvalidNoiseRate(noise_rate));
    }
    let schema = persona.schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut instances = Vec::with_capacity(n);
    for _ in 0..n {
        let values: Vec<ValueCode> = (0..schema.attr_count())
            .map(|a| sample_value(&mut rng, &persona.weights[a]))
            .collect();
        let label = persona.label(&values);
        instances.push(Instance { values, label });
    }

    let flip_count = libm::floor(noise_rate * n as f64) as usize;
    let mut flip_ids = rand::seq::index::sample(&mut rng, n, flip_count).into_vec();
    flip_ids.sort_unstable();

    let num_classes = schema.num_classes() as u16;
    let mut flips = Vec::with_capacity(flip_count);
    for id in flip_ids {
        let original = instances[id].label;
        let offset = rng.random_range(1..num_classes);
        instances[id].label = ClassId((original.0 + offset) % num_classes);
        flips.push((id, original));
    }

    let mask = NoiseMask {
        flips,
        requested_rate: noise_rate,
        realized_rate: flip_count as f64 / n as f64,
    };
    Ok((Dataset::new(schema.clone(), instances), mask))
}

/// The built-in synthetic users: an office worker whose behavior is the
/// seven-rule reference pattern, a night owl with a fourth (never
/// produced) class and an irrelevant location attribute, and a heavy
/// call screener with strong class skew.
pub fn bundled_personas() -> Vec<Persona> {
    vec![office_worker(), night_owl(), screener()]
}

/// Looks a bundled persona up by name.
pub fn bundled_persona(name: &str) -> Option<Persona> {
    bundled_personas().into_iter().find(|p| p.name() == name)
}

fn office_worker() -> Persona {
    let schema = AttributeSchema::new(
        vec![
            ("location", vec!["Home", "Office"]),
            ("situation", vec!["Meeting", "Lecture", "Lunch"]),
            ("relationship", vec!["Boss", "Friend", "Colleague", "Unknown"]),
        ],
        vec!["Accept", "Reject", "Missed"],
    )
    .expect("static schema");
    let rules = vec![
        (
            vec![("location", "Home"), ("relationship", "Unknown")],
            "Missed",
        ),
        (
            vec![("location", "Home"), ("relationship", "Friend")],
            "Accept",
        ),
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
        (
            vec![("location", "Office"), ("situation", "Lecture")],
            "Reject",
        ),
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
        // Fallbacks completing the product space around the seven
        // reference behaviors: at home only friends get through, meetings
        // default to rejection, lunch calls are generally taken.
        (
            vec![
                ("location", "Office"),
                ("situation", "Meeting"),
                ("relationship", "Friend"),
            ],
            "Accept",
        ),
        (vec![("location", "Home")], "Missed"),
        (
            vec![("location", "Office"), ("situation", "Meeting")],
            "Reject",
        ),
        (
            vec![("location", "Office"), ("situation", "Lunch")],
            "Accept",
        ),
    ];
    Persona::new("office_worker", schema, &rules)
        .expect("static persona")
        .with_weights("location", &[("Home", 2), ("Office", 3)])
        .expect("static weights")
        .with_weights(
            "situation",
            &[("Meeting", 3), ("Lecture", 2), ("Lunch", 3)],
        )
        .expect("static weights")
}

fn night_owl() -> Persona {
    let schema = AttributeSchema::new(
        vec![
            ("daytime", vec!["Night", "Morning", "Afternoon", "Evening"]),
            ("location", vec!["Home", "Club", "Work"]),
            ("situation", vec!["Sleep", "Party", "Working", "Chill"]),
            ("relationship", vec!["Friend", "Boss", "Family", "Unknown"]),
        ],
        vec!["Accept", "Reject", "Missed", "Outgoing"],
    )
    .expect("static schema");
    let rules = vec![
        (vec![("situation", "Sleep")], "Missed"),
        (vec![("situation", "Party")], "Missed"),
        (vec![("daytime", "Morning")], "Missed"),
        (vec![("relationship", "Unknown")], "Reject"),
        (vec![], "Accept"),
    ];
    Persona::new("night_owl", schema, &rules)
        .expect("static persona")
        .with_weights(
            "daytime",
            &[("Night", 2), ("Morning", 1), ("Afternoon", 2), ("Evening", 2)],
        )
        .expect("static weights")
        .with_weights(
            "situation",
            &[("Sleep", 1), ("Party", 1), ("Working", 3), ("Chill", 3)],
        )
        .expect("static weights")
        .with_weights(
            "relationship",
            &[("Friend", 2), ("Boss", 2), ("Family", 2), ("Unknown", 3)],
        )
        .expect("static weights")
}

fn screener() -> Persona {
    let schema = AttributeSchema::new(
        vec![
            ("location", vec!["Home", "Office"]),
            ("situation", vec!["Busy", "Free"]),
            (
                "relationship",
                vec!["Mother", "Friend", "Colleague", "Unknown", "Telemarketer"],
            ),
        ],
        vec!["Accept", "Reject", "Missed"],
    )
    .expect("static schema");
    let rules = vec![
        (vec![("relationship", "Mother")], "Accept"),
        (vec![("relationship", "Telemarketer")], "Reject"),
        (vec![("relationship", "Unknown")], "Reject"),
        (vec![("situation", "Busy")], "Reject"),
        (vec![("relationship", "Friend")], "Accept"),
        (vec![], "Missed"),
    ];
    Persona::new("screener", schema, &rules)
        .expect("static persona")
        .with_weights(
            "relationship",
            &[
                ("Mother", 1),
                ("Friend", 2),
                ("Colleague", 2),
                ("Unknown", 1),
                ("Telemarketer", 2),
            ],
        )
        .expect("static weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    fn toy_schema() -> AttributeSchema {
        AttributeSchema::new(
            vec![("x", vec!["x0", "x1"]), ("y", vec!["y0", "y1", "y2"])],
            vec!["a", "b", "c"],
        )
        .unwrap()
    }

    #[test]
    fn non_total_rule_lists_are_rejected_at_construction() {
        let err = Persona::new(
            "partial",
            toy_schema(),
            &[(vec![("x", "x0")], "a"), (vec![("y", "y0")], "b")],
        )
        .unwrap_err();
        match err {
            PersonaError::NotTotal { example } => {
                // x1 with any of y1/y2 is uncovered.
                assert_eq!(example[0], "x1");
                assert_ne!(example[1], "y0");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rule_priority_resolves_overlaps() {
        let persona = Persona::new(
            "layered",
            toy_schema(),
            &[
                (vec![("x", "x0"), ("y", "y0")], "c"),
                (vec![("x", "x0")], "a"),
                (vec![], "b"),
            ],
        )
        .unwrap();
        let schema = persona.schema().clone();
        let ctx = |x: &str, y: &str| {
            vec![schema.encode_value(0, x), schema.encode_value(1, y)]
        };
        assert_eq!(persona.label(&ctx("x0", "y0")), schema.class_id("c").unwrap());
        assert_eq!(persona.label(&ctx("x0", "y1")), schema.class_id("a").unwrap());
        assert_eq!(persona.label(&ctx("x1", "y0")), schema.class_id("b").unwrap());
    }

    #[test]
    fn bad_rule_references_are_rejected() {
        let bad_attr = Persona::new("p", toy_schema(), &[(vec![("z", "x0")], "a")]);
        assert!(matches!(
            bad_attr,
            Err(PersonaError::UnknownAttribute { rule: 0, .. })
        ));
        let bad_value = Persona::new("p", toy_schema(), &[(vec![("x", "nope")], "a")]);
        assert!(matches!(bad_value, Err(PersonaError::UnknownValue { .. })));
        let bad_class = Persona::new("p", toy_schema(), &[(vec![], "d")]);
        assert!(matches!(bad_class, Err(PersonaError::UnknownClass { .. })));
        let dup = Persona::new(
            "p",
            toy_schema(),
            &[(vec![("x", "x0"), ("x", "x1")], "a")],
        );
        assert!(matches!(dup, Err(PersonaError::DuplicateCondition { .. })));
    }

    #[test]
    fn noise_free_generation_is_rule_consistent() {
        let persona = bundled_persona("office_worker").unwrap();
        let (ds, mask) = generate(&persona, 300, 0.0, 17).unwrap();
        assert!(mask.is_empty());
        assert_eq!(mask.realized_rate, 0.0);
        assert_eq!(ds.len(), 300);
        assert!(ds.validate().violations.is_empty());
        let mut seen: BTreeMap<Vec<u16>, ClassId> = BTreeMap::new();
        for inst in ds.instances() {
            let key: Vec<u16> = inst.values.iter().map(|v| v.0).collect();
            let prev = seen.insert(key, inst.label);
            if let Some(label) = prev {
                assert_eq!(label, inst.label);
            }
            assert_eq!(persona.label(&inst.values), inst.label);
        }
    }

    #[test]
    fn flip_count_is_exact_and_flips_actually_differ() {
        let persona = bundled_persona("screener").unwrap();
        let (ds, mask) = generate(&persona, 1000, 0.05, 3).unwrap();
        assert_eq!(mask.len(), 50);
        assert_eq!(mask.realized_rate, 0.05);
        assert!(mask.flips.windows(2).all(|w| w[0].0 < w[1].0));
        for &(id, original) in &mask.flips {
            assert_ne!(ds.instance(id).label, original);
            assert_eq!(persona.label(&ds.instance(id).values), original);
            assert!(mask.contains(id));
            assert_eq!(mask.original_label(id), Some(original));
        }
    }

    #[test]
    fn generation_is_a_pure_function_of_the_seed() {
        let persona = bundled_persona("night_owl").unwrap();
        let a = generate(&persona, 400, 0.1, 99).unwrap();
        let b = generate(&persona, 400, 0.1, 99).unwrap();
        assert_eq!(a, b);
        let c = generate(&persona, 400, 0.1, 100).unwrap();
        assert_ne!(a.0.instances(), c.0.instances());
    }

    #[test]
    fn request_preconditions_are_enforced() {
        let persona = bundled_persona("office_worker").unwrap();
        assert_eq!(generate(&persona, 0, 0.0, 1), Err(SynthError::EmptyRequest));
        assert_eq!(
            generate(&persona, 10, 1.0, 1),
            Err(SynthError::InvalidNoiseRate(1.0))
        );
        assert_eq!(
            generate(&persona, 10, -0.1, 1),
            Err(SynthError::InvalidNoiseRate(-0.1))
        );
    }

    #[test]
    fn bundled_personas_cover_the_documented_behaviors() {
        let personas = bundled_personas();
        assert!(personas.len() >= 3);
        let office = bundled_persona("office_worker").unwrap();
        let schema = office.schema();
        let ctx = |l: &str, s: &str, r: &str| {
            vec![
                schema.encode_value(0, l),
                schema.encode_value(1, s),
                schema.encode_value(2, r),
            ]
        };
        let class = |n: &str| schema.class_id(n).unwrap();
        assert_eq!(office.label(&ctx("Office", "Meeting", "Boss")), class("Accept"));
        assert_eq!(office.label(&ctx("Home", "Lunch", "Unknown")), class("Missed"));
        assert_eq!(office.label(&ctx("Office", "Lecture", "Friend")), class("Reject"));

        // The night owl's fourth class exists in the schema but is never
        // generated.
        let owl = bundled_persona("night_owl").unwrap();
        let outgoing = owl.schema().class_id("Outgoing").unwrap();
        let (ds, _) = generate(&owl, 500, 0.0, 7).unwrap();
        assert!(ds.instances().iter().all(|i| i.label != outgoing));
    }

    #[test]
    fn zero_weight_values_are_never_sampled() {
        let persona = Persona::new("p", toy_schema(), &[(vec![], "a")])
            .unwrap()
            .with_weights("y", &[("y0", 1), ("y1", 0), ("y2", 2)])
            .unwrap();
        let (ds, _) = generate(&persona, 200, 0.0, 5).unwrap();
        let y1 = persona.schema().encode_value(1, "y1");
        assert!(ds.instances().iter().all(|i| i.values[1] != y1));
    }

    #[test]
    fn weight_tables_must_cover_the_domain() {
        let persona = Persona::new("p", toy_schema(), &[(vec![], "a")]).unwrap();
        assert!(matches!(
            persona.clone().with_weights("y", &[("y0", 1)]),
            Err(PersonaError::IncompleteWeights { .. })
        ));
        assert!(matches!(
            persona
                .clone()
                .with_weights("y", &[("y0", 0), ("y1", 0), ("y2", 0)]),
            Err(PersonaError::ZeroWeightSum { .. })
        ));
        assert!(matches!(
            persona.with_weights("nope", &[]),
            Err(PersonaError::UnknownWeightAttribute(_))
        ));
    }
}
