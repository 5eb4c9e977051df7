//! Multi-way decision trees over symbolic features, grown by gain ratio and
//! pruned by pessimistic error estimates (C4.5 style).

use std::collections::{BTreeMap, BTreeSet};

use statrs::function::beta::beta_reg;

use crate::corpus::Tag;
use crate::error::{Error, Result};
use crate::mbl::Case;

pub const DEFAULT_CONFIDENCE: f64 = 0.25;
/// Nodes with fewer cases become leaves.
pub const MIN_SPLIT_SUPPORT: usize = 2;

const GAIN_EPSILON: f64 = 1e-12;

type Counts = BTreeMap<Tag, u64>;

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Leaf {
        label: Tag,
        counts: Counts,
    },
    Split {
        feature: usize,
        /// Children by feature value, sorted by value.
        branches: Vec<(String, TreeNode)>,
        /// Branch taken for values unseen in training: the largest child.
        default: usize,
        label: Tag,
        counts: Counts,
    },
}

impl TreeNode {
    pub fn counts(&self) -> &Counts {
        match self {
            TreeNode::Leaf { counts, .. } | TreeNode::Split { counts, .. } => counts,
        }
    }

    pub fn label(&self) -> &Tag {
        match self {
            TreeNode::Leaf { label, .. } | TreeNode::Split { label, .. } => label,
        }
    }

    fn size(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { branches, .. } => {
                1 + branches.iter().map(|(_, c)| c.size()).sum::<usize>()
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { branches, .. } => {
                1 + branches.iter().map(|(_, c)| c.depth()).max().unwrap_or(0)
            }
        }
    }

    fn total(&self) -> u64 {
        self.counts().values().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    root: TreeNode,
    arity: usize,
    confidence: Option<f64>,
}

fn entropy(counts: &Counts) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Upper limit of the binomial confidence interval for `errors` out of
/// `n`, at confidence `cf`: the error rate p with P(X ≤ errors) = cf.
pub fn pessimistic_error_rate(errors: u64, n: u64, cf: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if errors >= n {
        return 1.0;
    }
    if errors == 0 {
        return 1.0 - cf.powf(1.0 / n as f64);
    }
    // P(X ≤ e; n, p) = I_{1-p}(n - e, e + 1), decreasing in p.
    let cdf = |p: f64| beta_reg((n - errors) as f64, (errors + 1) as f64, 1.0 - p);
    let (mut lo, mut hi) = (errors as f64 / n as f64, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) > cf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Builder<'a> {
    cases: &'a [Case],
    global: Counts,
}

impl Builder<'_> {
    fn modal(&self, counts: &Counts) -> Tag {
        counts
            .iter()
            .max_by(|a, b| {
                a.1.cmp(b.1)
                    .then_with(|| self.global.get(a.0).cmp(&self.global.get(b.0)))
                    .then_with(|| b.0.cmp(a.0))
            })
            .map(|(t, _)| t.clone())
            .expect("non-empty node")
    }

    fn counts(&self, idx: &[usize]) -> Counts {
        let mut c = Counts::new();
        for &i in idx {
            *c.entry(self.cases[i].label.clone()).or_insert(0) += 1;
        }
        c
    }

    fn partition<'b>(&'b self, idx: &[usize], feature: usize) -> BTreeMap<&'b str, Vec<usize>> {
        let mut parts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &i in idx {
            parts
                .entry(self.cases[i].features[feature].as_str())
                .or_default()
                .push(i);
        }
        parts
    }

    /// (gain, split info) of splitting `idx` on `feature`.
    fn gain(&self, idx: &[usize], feature: usize, base: f64) -> (f64, f64) {
        let n = idx.len() as f64;
        let mut remainder = 0.0;
        let mut split_info = 0.0;
        for part in self.partition(idx, feature).values() {
            let w = part.len() as f64 / n;
            remainder += w * entropy(&self.counts(part));
            split_info -= w * w.log2();
        }
        ((base - remainder).max(0.0), split_info)
    }

    /// Best feature by gain ratio among those with at least average gain.
    fn choose(&self, idx: &[usize], used: &BTreeSet<usize>, counts: &Counts) -> Option<usize> {
        let base = entropy(counts);
        let arity = self.cases[idx[0]].features.len();
        let scored: Vec<(usize, f64, f64)> = (0..arity)
            .filter(|f| !used.contains(f))
            .filter(|&f| {
                let v = &self.cases[idx[0]].features[f];
                idx.iter().any(|&i| &self.cases[i].features[f] != v)
            })
            .map(|f| {
                let (g, s) = self.gain(idx, f, base);
                (f, g, s)
            })
            .collect();
        if scored.is_empty() {
            return None;
        }
        let mean = scored.iter().map(|s| s.1).sum::<f64>() / scored.len() as f64;
        let mut best: Option<(usize, f64)> = None;
        for &(f, g, s) in &scored {
            if g <= GAIN_EPSILON || g < mean - GAIN_EPSILON || s <= 0.0 {
                continue;
            }
            let ratio = g / s;
            if best.is_none_or(|(_, r)| ratio > r + GAIN_EPSILON) {
                best = Some((f, ratio));
            }
        }
        best.map(|(f, _)| f)
    }

    fn grow(&self, idx: &[usize], used: &mut BTreeSet<usize>) -> TreeNode {
        let counts = self.counts(idx);
        let label = self.modal(&counts);
        if idx.len() < MIN_SPLIT_SUPPORT || counts.len() == 1 {
            return TreeNode::Leaf { label, counts };
        }
        let Some(feature) = self.choose(idx, used, &counts) else {
            return TreeNode::Leaf { label, counts };
        };
        used.insert(feature);
        let parts = self.partition(idx, feature);
        let mut default = 0;
        let mut largest = 0;
        let mut branches = Vec::with_capacity(parts.len());
        for (k, (value, part)) in parts.into_iter().enumerate() {
            if part.len() > largest {
                largest = part.len();
                default = k;
            }
            branches.push((value.to_owned(), self.grow(&part, used)));
        }
        used.remove(&feature);
        TreeNode::Split {
            feature,
            branches,
            default,
            label,
            counts,
        }
    }
}

/// Replaces subtrees by leaves wherever the leaf's pessimistic error
/// estimate does not exceed the subtree's. Returns the node's estimate.
fn prune(node: &mut TreeNode, cf: f64) -> f64 {
    let n = node.total();
    let leaf_errors = n - node.counts().get(node.label()).copied().unwrap_or(0);
    let leaf_estimate = n as f64 * pessimistic_error_rate(leaf_errors, n, cf);
    match node {
        TreeNode::Leaf { .. } => leaf_estimate,
        TreeNode::Split {
            branches,
            label,
            counts,
            ..
        } => {
            let subtree: f64 = branches.iter_mut().map(|(_, c)| prune(c, cf)).sum();
            if leaf_estimate <= subtree + 1e-9 {
                *node = TreeNode::Leaf {
                    label: label.clone(),
                    counts: std::mem::take(counts),
                };
                leaf_estimate
            } else {
                subtree
            }
        }
    }
}

impl DecisionTree {
    /// Grows a tree on `cases`; prunes it when `confidence` is given.
    pub fn train(cases: &[Case], confidence: Option<f64>) -> Result<DecisionTree> {
        let Some(first) = cases.first() else {
            return Err(Error::EmptyInput);
        };
        let arity = first.features.len();
        if let Some(c) = cases.iter().find(|c| c.features.len() != arity) {
            return Err(Error::Arity {
                expected: arity,
                got: c.features.len(),
            });
        }
        if let Some(cf) = confidence {
            if !(cf > 0.0 && cf < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "pruning confidence {cf} outside (0,1)"
                )));
            }
        }
        let mut global = Counts::new();
        for c in cases {
            *global.entry(c.label.clone()).or_insert(0) += 1;
        }
        let builder = Builder { cases, global };
        let idx: Vec<usize> = (0..cases.len()).collect();
        let mut root = builder.grow(&idx, &mut BTreeSet::new());
        if let Some(cf) = confidence {
            prune(&mut root, cf);
        }
        Ok(DecisionTree {
            root,
            arity,
            confidence,
        })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn confidence(&self) -> Option<f64> {
        self.confidence
    }

    /// Internal nodes plus leaves.
    pub fn node_count(&self) -> usize {
        self.root.size()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn classify<S: AsRef<str>>(&self, instance: &[S]) -> Result<Tag> {
        Ok(self.walk(instance)?.1.label().clone())
    }

    /// Branch positions taken from the root to the leaf reached by
    /// `instance`.
    pub fn trace<S: AsRef<str>>(&self, instance: &[S]) -> Result<Vec<usize>> {
        Ok(self.walk(instance)?.0)
    }

    fn walk<S: AsRef<str>>(&self, instance: &[S]) -> Result<(Vec<usize>, &TreeNode)> {
        if instance.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: instance.len(),
            });
        }
        let mut node = &self.root;
        let mut path = Vec::new();
        while let TreeNode::Split {
            feature,
            branches,
            default,
            ..
        } = node
        {
            let v = instance[*feature].as_ref();
            let i = branches
                .binary_search_by(|(k, _)| k.as_str().cmp(v))
                .unwrap_or(*default);
            path.push(i);
            node = &branches[i].1;
        }
        Ok((path, node))
    }

    /// Feature indices tested on each root-to-leaf path.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        fn walk(node: &TreeNode, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            match node {
                TreeNode::Leaf { .. } => out.push(path.clone()),
                TreeNode::Split {
                    feature, branches, ..
                } => {
                    path.push(*feature);
                    for (_, c) in branches {
                        walk(c, path, out);
                    }
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }
}
