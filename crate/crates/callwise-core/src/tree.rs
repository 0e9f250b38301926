//! Gain-ratio decision tree for categorical attributes, plus flat-rule
//! extraction.
//!
//! Splits maximize information gain divided by split information, each
//! split fans out one child per value observed at the node, and an
//! attribute is used at most once per path. No pruning: the tree is meant
//! to be read (every leaf becomes one IF-THEN rule), and label noise is
//! handled upstream by the mislabel filter rather than by post-pruning.
//!
//! Determinism contract: equal gain ratios go to the earlier attribute in
//! schema order, equal majority counts to the earlier class in class-set
//! order, and children are stored in ascending value order.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{AttrIndex, AttributeSchema, ClassId, Dataset, ValueCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Nodes with fewer instances become majority leaves instead of
    /// splitting further. The default of 1 never stops a split.
    pub min_leaf_support: usize,
    /// Maximum split depth; `None` means one level per attribute, which is
    /// the natural ceiling anyway.
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            min_leaf_support: 1,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("cannot grow a tree from an empty dataset")]
    EmptyDataset,
    #[error("attribute index {0} is out of range")]
    UnknownAttribute(usize),
    #[error("min_leaf_support must be at least 1")]
    InvalidMinSupport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Leaf {
        class: ClassId,
        support: usize,
    },
    Split {
        attribute: AttrIndex,
        /// Majority class at this node; answers queries whose value has no
        /// child branch (unseen or out-of-domain values).
        fallback: ClassId,
        support: usize,
        /// One child per value observed here, ascending by value code.
        children: Vec<(ValueCode, Node)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    schema: AttributeSchema,
    params: TreeParams,
    root: Node,
}

/// One root-to-leaf path flattened into an IF-THEN rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRule {
    /// (attribute, value) tests in path order, root first. Empty when the
    /// tree is a single leaf.
    pub antecedent: Vec<(AttrIndex, ValueCode)>,
    pub class: ClassId,
    /// Training instances that reached the leaf.
    pub support: usize,
}

/// Information gain of splitting the whole dataset on one attribute,
/// divided by the split information; 0 when the split information is 0
/// (fewer than two observed values).
pub fn gain_ratio(dataset: &Dataset, attribute: AttrIndex) -> Result<f64, TreeError> {
    if attribute >= dataset.schema().attr_count() {
        return Err(TreeError::UnknownAttribute(attribute));
    }
    let ids: Vec<usize> = (0..dataset.len()).collect();
    Ok(gain_ratio_at(dataset, &ids, attribute))
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * libm::log2(p);
        }
    }
    h
}

fn class_histogram(dataset: &Dataset, ids: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; dataset.schema().num_classes()];
    for &id in ids {
        counts[dataset.instance(id).label.index()] += 1;
    }
    counts
}

fn gain_ratio_at(dataset: &Dataset, ids: &[usize], attribute: AttrIndex) -> f64 {
    if ids.is_empty() {
        return 0.0;
    }
    let total = ids.len();
    let num_classes = dataset.schema().num_classes();
    let mut by_value: Vec<(ValueCode, Vec<usize>)> = Vec::new();
    for &id in ids {
        let code = dataset.instance(id).values[attribute];
        match by_value.iter_mut().find(|(v, _)| *v == code) {
            Some((_, counts)) => counts[dataset.instance(id).label.index()] += 1,
            None => {
                let mut counts = vec![0usize; num_classes];
                counts[dataset.instance(id).label.index()] += 1;
                by_value.push((code, counts));
            }
        }
    }
    let base = entropy(&class_histogram(dataset, ids), total);
    let mut remainder = 0.0;
    let mut split_info = 0.0;
    for (_, counts) in &by_value {
        let nv: usize = counts.iter().sum();
        let w = nv as f64 / total as f64;
        remainder += w * entropy(counts, nv);
        split_info -= w * libm::log2(w);
    }
    if split_info == 0.0 {
        return 0.0;
    }
    (base - remainder) / split_info
}

/// Majority class of a histogram; ties keep the earliest class.
fn majority(counts: &[usize]) -> ClassId {
    let mut best = 0usize;
    for (idx, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = idx;
        }
    }
    ClassId(best as u16)
}

/// Grows an unpruned tree. The dataset must be non-empty; instances are
/// assumed schema-conformant.
pub fn build_tree(dataset: &Dataset, params: TreeParams) -> Result<DecisionTree, TreeError> {
    if dataset.is_empty() {
        return Err(TreeError::EmptyDataset);
    }
    if params.min_leaf_support == 0 {
        return Err(TreeError::InvalidMinSupport);
    }
    let max_depth = params
        .max_depth
        .unwrap_or_else(|| dataset.schema().attr_count());
    let ids: Vec<usize> = (0..dataset.len()).collect();
    let remaining: Vec<AttrIndex> = (0..dataset.schema().attr_count()).collect();
    let root = grow(dataset, &ids, &remaining, 0, max_depth, &params);
    Ok(DecisionTree {
        schema: dataset.schema().clone(),
        params,
        root,
    })
}

fn grow(
    dataset: &Dataset,
    ids: &[usize],
    remaining: &[AttrIndex],
    depth: usize,
    max_depth: usize,
    params: &TreeParams,
) -> Node {
    let counts = class_histogram(dataset, ids);
    let majority = majority(&counts);
    let single_class = counts.iter().filter(|&&c| c > 0).count() == 1;
    if single_class
        || remaining.is_empty()
        || depth >= max_depth
        || ids.len() < params.min_leaf_support
    {
        return Node::Leaf {
            class: majority,
            support: ids.len(),
        };
    }

    // Earliest attribute wins ties, so only a strictly better ratio moves
    // the choice.
    let mut best_attr = remaining[0];
    let mut best_ratio = gain_ratio_at(dataset, ids, best_attr);
    for &attr in &remaining[1..] {
        let ratio = gain_ratio_at(dataset, ids, attr);
        if ratio > best_ratio {
            best_ratio = ratio;
            best_attr = attr;
        }
    }

    let mut buckets: Vec<(ValueCode, Vec<usize>)> = Vec::new();
    for &id in ids {
        let code = dataset.instance(id).values[best_attr];
        match buckets.iter_mut().find(|(v, _)| *v == code) {
            Some((_, bucket)) => bucket.push(id),
            None => buckets.push((code, vec![id])),
        }
    }
    buckets.sort_by_key(|(code, _)| *code);

    let child_remaining: Vec<AttrIndex> = remaining
        .iter()
        .copied()
        .filter(|&a| a != best_attr)
        .collect();
    let children = buckets
        .into_iter()
        .map(|(code, bucket)| {
            (
                code,
                grow(dataset, &bucket, &child_remaining, depth + 1, max_depth, params),
            )
        })
        .collect();
    Node::Split {
        attribute: best_attr,
        fallback: majority,
        support: ids.len(),
        children,
    }
}

impl DecisionTree {
    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Walks the tree; a value with no branch at some split answers with
    /// that split's majority class. Values slices shorter than the schema
    /// panic only if a split actually needs the missing position.
    pub fn predict(&self, values: &[ValueCode]) -> ClassId {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { class, .. } => return *class,
                Node::Split {
                    attribute,
                    fallback,
                    children,
                    ..
                } => {
                    let value = values[*attribute];
                    match children.iter().find(|(code, _)| *code == value) {
                        Some((_, child)) => node = child,
                        None => return *fallback,
                    }
                }
            }
        }
    }

    /// Flattens every leaf into a rule, in depth-first child order (the
    /// order the rendered tree reads top to bottom).
    pub fn extract_rules(&self) -> Vec<PredictionRule> {
        let mut rules = Vec::new();
        let mut path = Vec::new();
        collect_rules(&self.root, &mut path, &mut rules);
        rules
    }

    pub fn leaf_count(&self) -> usize {
        fn leaves(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 1,
                Node::Split { children, .. } => children.iter().map(|(_, c)| leaves(c)).sum(),
            }
        }
        leaves(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn depth(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { children, .. } => {
                    1 + children.iter().map(|(_, c)| depth(c)).max().unwrap_or(0)
                }
            }
        }
        depth(&self.root)
    }
}

fn collect_rules(
    node: &Node,
    path: &mut Vec<(AttrIndex, ValueCode)>,
    rules: &mut Vec<PredictionRule>,
) {
    match node {
        Node::Leaf { class, support } => rules.push(PredictionRule {
            antecedent: path.clone(),
            class: *class,
            support: *support,
        }),
        Node::Split {
            attribute,
            children,
            ..
        } => {
            for (code, child) in children {
                path.push((*attribute, *code));
                collect_rules(child, path, rules);
                path.pop();
            }
        }
    }
}
