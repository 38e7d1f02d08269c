//! MetaClass: a binary tree of class groups.
//!
//! At each node the node's classes are split into two groups of roughly
//! equal instance count (largest class first, each class to the currently
//! lighter group). An instance goes right when the summed scores of the
//! right group minus those of the left group exceed the node's threshold,
//! which is chosen by threshold moving on the node's training instances
//! with instance-weighted group costs.

use serde::{Deserialize, Serialize};

use crate::data::{class_counts, validate_labels, CostMatrix, LabelAssignment, ScoreMatrix};
use crate::error::{Error, Result};

use super::check_problem;
use super::threshold::threshold_moving;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetaClassTree {
    Leaf {
        class: usize,
    },
    Split {
        left_classes: Vec<usize>,
        right_classes: Vec<usize>,
        #[serde(with = "crate::serde_ext::extended_f64")]
        threshold: f64,
        left: Box<MetaClassTree>,
        right: Box<MetaClassTree>,
    },
}

fn group_margin(row: &[f64], left: &[usize], right: &[usize]) -> f64 {
    let r: f64 = right.iter().map(|&j| row[j]).sum();
    let l: f64 = left.iter().map(|&j| row[j]).sum();
    r - l
}

/// Splits `classes` into two groups balancing instance counts.
pub(crate) fn balance_groups(classes: &[usize], counts: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut sorted = classes.to_vec();
    sorted.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let (mut left, mut right) = (Vec::new(), Vec::new());
    let (mut wl, mut wr) = (0usize, 0usize);
    for k in sorted {
        if wl <= wr {
            left.push(k);
            wl += counts[k];
        } else {
            right.push(k);
            wr += counts[k];
        }
    }
    left.sort_unstable();
    right.sort_unstable();
    (left, right)
}

/// Instance-weighted mean of `Cost(i, j)` over `i` in `from`, `j` in `to`.
pub(crate) fn group_cost(costs: &CostMatrix, counts: &[usize], from: &[usize], to: &[usize]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &i in from {
        for &j in to {
            let w = counts[i] as f64 * counts[j] as f64;
            num += w * costs.cost(i, j);
            den += w;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn build(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
    counts: &[usize],
    classes: &[usize],
) -> MetaClassTree {
    if let [only] = classes {
        return MetaClassTree::Leaf { class: *only };
    }
    let (left, right) = balance_groups(classes, counts);
    let in_left = |y: usize| left.contains(&y);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (row, &y) in scores.rows().zip(labels) {
        if !classes.contains(&y) {
            continue;
        }
        let d = group_margin(row, &left, &right);
        if in_left(y) {
            neg.push(d);
        } else {
            pos.push(d);
        }
    }
    let left_to_right = group_cost(costs, counts, &left, &right);
    let right_to_left = group_cost(costs, counts, &right, &left);
    let t = threshold_moving(&pos, &neg, |fp, fn_| {
        fp as f64 * left_to_right + fn_ as f64 * right_to_left
    });
    MetaClassTree::Split {
        left: Box::new(build(scores, labels, costs, counts, &left)),
        right: Box::new(build(scores, labels, costs, counts, &right)),
        left_classes: left,
        right_classes: right,
        threshold: t.threshold,
    }
}

pub fn metaclass_optimize(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
) -> Result<MetaClassTree> {
    check_problem(scores, labels, costs)?;
    let c = scores.class_count();
    validate_labels(labels, c)?;
    let counts = class_counts(labels, c)?;
    let classes: Vec<usize> = (0..c).collect();
    Ok(build(scores, labels, costs, &counts, &classes))
}

impl MetaClassTree {
    /// Routes one score row to a leaf.
    pub fn classify(&self, row: &[f64]) -> usize {
        let mut node = self;
        loop {
            match node {
                MetaClassTree::Leaf { class } => return *class,
                MetaClassTree::Split {
                    left_classes,
                    right_classes,
                    threshold,
                    left,
                    right,
                } => {
                    node = if group_margin(row, left_classes, right_classes) > *threshold {
                        right
                    } else {
                        left
                    };
                }
            }
        }
    }

    pub fn decide(&self, scores: &ScoreMatrix) -> Result<LabelAssignment> {
        let c = scores.class_count();
        self.validate(c)?;
        Ok(LabelAssignment::from_raw(
            scores.rows().map(|r| self.classify(r)).collect(),
            c,
        ))
    }

    /// Classes covered by this subtree, ascending.
    pub fn classes(&self) -> Vec<usize> {
        match self {
            MetaClassTree::Leaf { class } => vec![*class],
            MetaClassTree::Split {
                left_classes,
                right_classes,
                ..
            } => {
                let mut all = left_classes.clone();
                all.extend(right_classes);
                all.sort_unstable();
                all
            }
        }
    }

    /// Checks that leaves partition `0..class_count` and that each split's
    /// groups match its children.
    pub fn validate(&self, class_count: usize) -> Result<()> {
        fn walk(node: &MetaClassTree, seen: &mut Vec<usize>) -> Result<()> {
            match node {
                MetaClassTree::Leaf { class } => {
                    seen.push(*class);
                    Ok(())
                }
                MetaClassTree::Split {
                    left_classes,
                    right_classes,
                    left,
                    right,
                    ..
                } => {
                    if left_classes.iter().any(|k| right_classes.contains(k)) {
                        return Err(Error::invalid("MetaClass groups overlap"));
                    }
                    if left.classes() != sorted(left_classes) || right.classes() != sorted(right_classes) {
                        return Err(Error::invalid("MetaClass groups disagree with subtrees"));
                    }
                    walk(left, seen)?;
                    walk(right, seen)
                }
            }
        }
        fn sorted(v: &[usize]) -> Vec<usize> {
            let mut v = v.to_vec();
            v.sort_unstable();
            v
        }
        let mut seen = Vec::new();
        walk(self, &mut seen)?;
        seen.sort_unstable();
        if seen != (0..class_count).collect::<Vec<_>>() {
            return Err(Error::invalid(format!(
                "MetaClass leaves {seen:?} do not partition {class_count} classes"
            )));
        }
        Ok(())
    }
}
