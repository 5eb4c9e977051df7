//! Exact nearest-set retrieval over a feature trie.
//!
//! Features are tested in decreasing Information Gain order. The search is a
//! depth-first branch-and-bound: a partial distance already above the best
//! complete distance cannot improve, since all weights are non-negative.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::Tag;

use super::{Case, DISTANCE_EPSILON};

const UNSEEN: u32 = u32::MAX;

#[derive(Clone, Debug, Default)]
struct Node {
    /// (value id, child node) sorted by value id.
    children: Vec<(u32, u32)>,
    leaf: Option<u32>,
}

#[derive(Clone, Debug)]
pub(super) struct CaseIndex {
    /// Feature positions in test order.
    order: Vec<usize>,
    symbols: Vec<HashMap<String, u32>>,
    nodes: Vec<Node>,
    leaves: Vec<BTreeMap<Tag, u64>>,
}

impl CaseIndex {
    pub(super) fn build(cases: &[Case], ig: &[f64]) -> CaseIndex {
        let arity = ig.len();
        let mut order: Vec<usize> = (0..arity).collect();
        order.sort_by(|&a, &b| ig[b].total_cmp(&ig[a]).then(a.cmp(&b)));

        let mut symbols: Vec<HashMap<String, u32>> = vec![HashMap::new(); arity];
        let mut nodes = vec![Node::default()];
        let mut leaves: Vec<BTreeMap<Tag, u64>> = Vec::new();
        for case in cases {
            let mut node = 0usize;
            for &f in &order {
                let table = &mut symbols[f];
                let next_id = table.len() as u32;
                let value = *table.entry(case.features[f].clone()).or_insert(next_id);
                node = match nodes[node].children.binary_search_by_key(&value, |c| c.0) {
                    Ok(i) => nodes[node].children[i].1 as usize,
                    Err(i) => {
                        let child = nodes.len();
                        nodes.push(Node::default());
                        nodes[node].children.insert(i, (value, child as u32));
                        child
                    }
                };
            }
            let leaf = match nodes[node].leaf {
                Some(l) => l as usize,
                None => {
                    leaves.push(BTreeMap::new());
                    nodes[node].leaf = Some((leaves.len() - 1) as u32);
                    leaves.len() - 1
                }
            };
            *leaves[leaf].entry(case.label.clone()).or_insert(0) += 1;
        }
        CaseIndex {
            order,
            symbols,
            nodes,
            leaves,
        }
    }

    /// Minimum distance and the summed label counts of every stored case at
    /// that distance.
    pub(super) fn nearest<S: AsRef<str>>(
        &self,
        instance: &[S],
        weights: &[f64],
    ) -> (f64, BTreeMap<Tag, u64>) {
        let query: Vec<u32> = self
            .order
            .iter()
            .map(|&f| {
                self.symbols[f]
                    .get(instance[f].as_ref())
                    .copied()
                    .unwrap_or(UNSEEN)
            })
            .collect();
        let w: Vec<f64> = self.order.iter().map(|&f| weights[f]).collect();
        let mut search = Search {
            index: self,
            query: &query,
            weights: &w,
            best: f64::INFINITY,
            found: Vec::new(),
        };
        search.visit(0, 0, 0.0);

        let best = search.best;
        let mut counts = BTreeMap::new();
        for (d, leaf) in search.found {
            if d <= best + DISTANCE_EPSILON {
                for (t, c) in &self.leaves[leaf as usize] {
                    *counts.entry(t.clone()).or_insert(0) += c;
                }
            }
        }
        (best, counts)
    }
}

struct Search<'a> {
    index: &'a CaseIndex,
    query: &'a [u32],
    weights: &'a [f64],
    best: f64,
    found: Vec<(f64, u32)>,
}

impl Search<'_> {
    fn visit(&mut self, node: usize, depth: usize, cost: f64) {
        let index = self.index;
        let n = &index.nodes[node];
        if depth == self.query.len() {
            let leaf = n.leaf.expect("full-depth node holds a leaf");
            if cost < self.best {
                self.best = cost;
                let best = self.best;
                self.found.retain(|&(d, _)| d <= best + DISTANCE_EPSILON);
            }
            if cost <= self.best + DISTANCE_EPSILON {
                self.found.push((cost, leaf));
            }
            return;
        }
        let value = self.query[depth];
        let w = self.weights[depth];
        let matching = n.children.binary_search_by_key(&value, |c| c.0).ok();
        if let Some(i) = matching {
            self.visit(n.children[i].1 as usize, depth + 1, cost);
        }
        let mismatch_cost = cost + w;
        if mismatch_cost > self.best + DISTANCE_EPSILON {
            return;
        }
        for (i, &(_, child)) in n.children.iter().enumerate() {
            if Some(i) == matching {
                continue;
            }
            // `best` may shrink while siblings are explored.
            if mismatch_cost > self.best + DISTANCE_EPSILON {
                return;
            }
            self.visit(child as usize, depth + 1, mismatch_cost);
        }
    }
}
