//! Categorical data model shared by every learner in this crate.
//!
//! Attribute values and class labels are interned: the schema owns the
//! human-readable strings, instances carry compact integer codes. All
//! algorithms downstream work on codes only, which keeps counting loops
//! tight and makes value identity exact (no string comparison anywhere).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

/// Position of an attribute within a schema (column order).
pub type AttrIndex = usize;

/// Interned categorical value: an index into the owning attribute's domain.
///
/// `ValueCode::OUT_OF_DOMAIN` is a reserved sentinel for prediction-time
/// values that were never part of the schema. Datasets must not contain it;
/// classifiers treat it as "count zero everywhere" and fall back to their
/// own smoothing or majority policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueCode(pub u16);

impl ValueCode {
    pub const OUT_OF_DOMAIN: ValueCode = ValueCode(u16::MAX);

    #[inline]
    pub fn is_out_of_domain(self) -> bool {
        self == Self::OUT_OF_DOMAIN
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned class label: an index into the schema's class set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u16);

impl ClassId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Largest representable domain or class set. Code `u16::MAX` is reserved
/// for [`ValueCode::OUT_OF_DOMAIN`].
pub const MAX_DOMAIN: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Attribute {
    name: String,
    domain: Vec<String>,
}

/// Names the attributes, their value domains, and the class set.
///
/// Attribute order is meaningful: learners break ties between equally good
/// attributes by schema order, and the class set order decides ties between
/// equally likely classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("attribute name must not be empty")]
    EmptyAttributeName,
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("attribute `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("attribute `{attribute}` lists value `{value}` twice")]
    DuplicateValue { attribute: String, value: String },
    #[error("attribute `{0}` has more than {MAX_DOMAIN} values")]
    DomainTooLarge(String),
    #[error("class set needs at least two distinct classes")]
    TooFewClasses,
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("class set has more than {MAX_DOMAIN} classes")]
    TooManyClasses,
}

impl AttributeSchema {
    /// Builds a schema and checks its well-formedness: unique non-empty
    /// attribute names, unique values per domain, at least two classes.
    pub fn new<S: Into<String>>(
        attributes: Vec<(S, Vec<S>)>,
        classes: Vec<S>,
    ) -> Result<Self, SchemaError> {
        let attributes: Vec<Attribute> = attributes
            .into_iter()
            .map(|(name, domain)| Attribute {
                name: name.into(),
                domain: domain.into_iter().map(Into::into).collect(),
            })
            .collect();
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();

        for (i, attr) in attributes.iter().enumerate() {
            if attr.name.is_empty() {
                return Err(SchemaError::EmptyAttributeName);
            }
            if attributes[..i].iter().any(|a| a.name == attr.name) {
                return Err(SchemaError::DuplicateAttribute(attr.name.clone()));
            }
            if attr.domain.is_empty() {
                return Err(SchemaError::EmptyDomain(attr.name.clone()));
            }
            if attr.domain.len() > MAX_DOMAIN {
                return Err(SchemaError::DomainTooLarge(attr.name.clone()));
            }
            for (j, value) in attr.domain.iter().enumerate() {
                if attr.domain[..j].contains(value) {
                    return Err(SchemaError::DuplicateValue {
                        attribute: attr.name.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        if classes.len() < 2 {
            return Err(SchemaError::TooFewClasses);
        }
        if classes.len() > MAX_DOMAIN {
            return Err(SchemaError::TooManyClasses);
        }
        for (i, class) in classes.iter().enumerate() {
            if classes[..i].contains(class) {
                return Err(SchemaError::DuplicateClass(class.clone()));
            }
        }
        Ok(Self { attributes, classes })
    }

    /// Builds a schema without the `new` checks, for loaders that intern
    /// observed values as they stream a file and may legitimately end up
    /// with empty domains (header-only input) or a degenerate class set.
    ///
    /// Sizes are still capped: domains and class sets beyond [`MAX_DOMAIN`]
    /// cannot be encoded and will panic here rather than corrupt codes.
    pub fn from_observed(attributes: Vec<(String, Vec<String>)>, classes: Vec<String>) -> Self {
        assert!(
            attributes.iter().all(|(_, d)| d.len() <= MAX_DOMAIN),
            "attribute domain exceeds MAX_DOMAIN"
        );
        assert!(classes.len() <= MAX_DOMAIN, "class set exceeds MAX_DOMAIN");
        Self {
            attributes: attributes
                .into_iter()
                .map(|(name, domain)| Attribute { name, domain })
                .collect(),
            classes,
        }
    }

    pub fn attr_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn attribute_name(&self, attr: AttrIndex) -> &str {
        &self.attributes[attr].name
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn domain(&self, attr: AttrIndex) -> &[String] {
        &self.attributes[attr].domain
    }

    pub fn domain_size(&self, attr: AttrIndex) -> usize {
        self.attributes[attr].domain.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// All class ids in class-set order.
    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.classes.len()).map(|i| ClassId(i as u16))
    }

    pub fn class_name(&self, class: ClassId) -> &str {
        &self.classes[class.index()]
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .position(|c| c == name)
            .map(|i| ClassId(i as u16))
    }

    /// Looks a raw value up in the attribute's domain; unknown values map
    /// to the reserved out-of-domain code.
    pub fn encode_value(&self, attr: AttrIndex, value: &str) -> ValueCode {
        self.attributes[attr]
            .domain
            .iter()
            .position(|v| v == value)
            .map_or(ValueCode::OUT_OF_DOMAIN, |i| ValueCode(i as u16))
    }

    /// Resolves a code back to its string. Out-of-domain and out-of-range
    /// codes have no name.
    pub fn value_name(&self, attr: AttrIndex, code: ValueCode) -> Option<&str> {
        if code.is_out_of_domain() {
            return None;
        }
        self.attributes[attr]
            .domain
            .get(code.index())
            .map(String::as_str)
    }

    /// Encodes a full row of raw values plus a label. Unknown attribute
    /// values become the out-of-domain code (callers that require strict
    /// membership should run [`Dataset::validate`]); unknown labels are an
    /// error because no downstream policy can score them.
    pub fn encode_instance(&self, values: &[&str], label: &str) -> Result<Instance, EncodeError> {
        if values.len() != self.attr_count() {
            return Err(EncodeError::WrongArity {
                expected: self.attr_count(),
                found: values.len(),
            });
        }
        let label = self
            .class_id(label)
            .ok_or_else(|| EncodeError::UnknownClass(label.to_string()))?;
        Ok(Instance {
            values: values
                .iter()
                .enumerate()
                .map(|(attr, v)| self.encode_value(attr, v))
                .collect(),
            label,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("expected {expected} attribute values, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("label `{0}` is not in the class set")]
    UnknownClass(String),
}

/// One labeled observation: interned values in schema attribute order plus
/// an interned class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub values: Vec<ValueCode>,
    pub label: ClassId,
}

impl Instance {
    pub fn new(values: Vec<ValueCode>, label: ClassId) -> Self {
        Self { values, label }
    }
}

/// A schema plus its instances. Instance ids are implicit: an instance's id
/// is its position, so ids are always `0..len()` with no gaps and survive
/// subsetting as a clean renumbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: AttributeSchema,
    instances: Vec<Instance>,
}

impl Dataset {
    /// Wraps instances under a schema as-is. Use [`Dataset::validate`] to
    /// check conformance; learners assume it holds.
    pub fn new(schema: AttributeSchema, instances: Vec<Instance>) -> Self {
        Self { schema, instances }
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, id: usize) -> &Instance {
        &self.instances[id]
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Per-class instance counts, indexed by class id. Classes that never
    /// occur report 0.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.schema.num_classes()];
        for inst in &self.instances {
            counts[inst.label.index()] += 1;
        }
        counts
    }

    /// Checks every instance against the schema and reports all violations;
    /// an empty dataset is vacuously fine.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (id, inst) in self.instances.iter().enumerate() {
            if inst.values.len() != self.schema.attr_count() {
                violations.push(Violation {
                    instance_id: id,
                    issue: ValidationIssue::WrongArity {
                        expected: self.schema.attr_count(),
                        found: inst.values.len(),
                    },
                });
                continue;
            }
            for (attr, &code) in inst.values.iter().enumerate() {
                if code.is_out_of_domain() || code.index() >= self.schema.domain_size(attr) {
                    violations.push(Violation {
                        instance_id: id,
                        issue: ValidationIssue::ValueNotInDomain {
                            attribute: self.schema.attribute_name(attr).to_string(),
                        },
                    });
                }
            }
            if inst.label.index() >= self.schema.num_classes() {
                violations.push(Violation {
                    instance_id: id,
                    issue: ValidationIssue::LabelNotInClassSet,
                });
            }
        }
        ValidationReport { violations }
    }

    /// New dataset holding clones of the selected instances, in the order
    /// given. Ids renumber to `0..ids.len()`.
    pub fn subset(&self, ids: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: ids.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }
}

/// Outcome of [`Dataset::validate`]: empty means conformant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub instance_id: usize,
    pub issue: ValidationIssue,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationIssue {
    #[error("expected {expected} values, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("value for attribute `{attribute}` is not in its domain")]
    ValueNotInDomain { attribute: String },
    #[error("label is not in the class set")]
    LabelNotInClassSet,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "instance {}: {}", self.instance_id, self.issue)
    }
}
