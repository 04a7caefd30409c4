//! Credit propagation.
//!
//! The transitive share of entity `e` in product `p` is the sum, over every
//! citation path from `p` to `e`, of the product of edge weights along the
//! path. Allocations are computed bottom-up and memoized per product, so each
//! product's allocation is built once from the allocations of the products
//! it cites.

use std::collections::{BTreeMap, HashMap};
use std::num::NonZeroUsize;

use serde::Serialize;
use thiserror::Error;

use crate::graph::CreditGraph;
use crate::model::{CreditMap, EntityId};
use crate::sum::{compensated_sum, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("{0} is not a registered product")]
    UnknownProduct(EntityId),
}

/// Terminal credit shares of one product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub product: EntityId,
    pub shares: BTreeMap<EntityId, f64>,
    /// Depth cutoff, set when registered products were reported as terminals.
    pub truncated_at: Option<usize>,
}

impl Allocation {
    pub fn share(&self, entity: &EntityId) -> f64 {
        self.shares.get(entity).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.shares.values().copied())
    }

    /// Shares sorted by descending value, ties by ID.
    pub fn ranked(&self) -> Vec<(EntityId, f64)> {
        let mut rows: Vec<(EntityId, f64)> = self.shares.iter().map(|(k, v)| (k.clone(), *v)).collect();
        sort_ranked(&mut rows);
        rows
    }
}

fn sort_ranked(rows: &mut [(EntityId, f64)]) {
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Citation edges followed before registered products are treated as
    /// terminals. `None` follows every path to its end.
    pub max_depth: Option<NonZeroUsize>,
}

impl PropagationOptions {
    pub fn unlimited() -> Self {
        Self::default()
    }

    /// `None` for a depth of zero.
    pub fn with_max_depth(depth: usize) -> Option<Self> {
        NonZeroUsize::new(depth).map(|d| PropagationOptions { max_depth: Some(d) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankScope {
    AllProducts,
    /// Registered products not cited by any other registered product.
    RootsOnly,
}

/// A product's own weight vector, every target treated as terminal.
pub fn direct_credit(map: &CreditMap) -> Allocation {
    let mut acc: BTreeMap<EntityId, CompensatedSum> = BTreeMap::new();
    for entry in &map.entries {
        acc.entry(entry.entity.clone()).or_default().add(entry.weight);
    }
    Allocation { product: map.product.id.clone(), shares: finish(acc), truncated_at: None }
}

fn finish(acc: BTreeMap<EntityId, CompensatedSum>) -> BTreeMap<EntityId, f64> {
    acc.into_iter().map(|(k, s)| (k, s.value())).collect()
}

type Shares = BTreeMap<EntityId, f64>;

/// Memoizing evaluator over one graph. Reuse it across products to share
/// intermediate allocations.
pub struct Propagator<'g> {
    graph: &'g CreditGraph,
    /// Keyed by product and remaining depth (`None` = unlimited).
    memo: HashMap<(&'g EntityId, Option<usize>), Shares>,
}

impl<'g> Propagator<'g> {
    pub fn new(graph: &'g CreditGraph) -> Self {
        Propagator { graph, memo: HashMap::new() }
    }

    pub fn allocation(&mut self, product: &EntityId, opts: PropagationOptions) -> Result<Allocation, EngineError> {
        let (key, _) = self
            .graph
            .nodes()
            .get_key_value(product)
            .filter(|_| self.graph.is_registered(product))
            .ok_or_else(|| EngineError::UnknownProduct(product.clone()))?;
        let depth = opts.max_depth.map(NonZeroUsize::get);
        self.evaluate(key, depth);
        let shares = self.memo[&(key, depth)].clone();
        let truncated = depth.filter(|_| shares.keys().any(|k| self.graph.is_registered(k)));
        Ok(Allocation { product: product.clone(), shares, truncated_at: truncated })
    }

    /// Post-order evaluation on an explicit stack; a product is computed only
    /// once everything it cites (at the right remaining depth) is memoized.
    fn evaluate(&mut self, product: &'g EntityId, depth: Option<usize>) {
        let g = self.graph;
        let mut stack = vec![(product, depth)];
        while let Some(&(p, remaining)) = stack.last() {
            if self.memo.contains_key(&(p, remaining)) {
                stack.pop();
                continue;
            }
            let child_depth = remaining.map(|r| r - 1);
            let mut blocked = false;
            if child_depth != Some(0) {
                for edge in g.edges(p) {
                    if g.is_registered(&edge.target) && !self.memo.contains_key(&(&edge.target, child_depth)) {
                        stack.push((&edge.target, child_depth));
                        blocked = true;
                    }
                }
            }
            if blocked {
                continue;
            }

            let mut acc: BTreeMap<EntityId, CompensatedSum> = BTreeMap::new();
            for edge in g.edges(p) {
                if !g.is_registered(&edge.target) || child_depth == Some(0) {
                    acc.entry(edge.target.clone()).or_default().add(edge.weight);
                    continue;
                }
                for (entity, share) in &self.memo[&(&edge.target, child_depth)] {
                    acc.entry(entity.clone()).or_default().add(edge.weight * share);
                }
            }
            self.memo.insert((p, remaining), finish(acc));
            stack.pop();
        }
    }
}

pub fn transitive_credit(
    g: &CreditGraph,
    product: &EntityId,
    opts: PropagationOptions,
) -> Result<Allocation, EngineError> {
    Propagator::new(g).allocation(product, opts)
}

/// Transitive share of one entity in one product; 0 when it receives none.
pub fn entity_credit(
    g: &CreditGraph,
    product: &EntityId,
    entity: &EntityId,
    opts: PropagationOptions,
) -> Result<f64, EngineError> {
    Ok(transitive_credit(g, product, opts)?.share(entity))
}

/// Sums transitive shares over the products in scope, highest first.
pub fn aggregate_rank(g: &CreditGraph, scope: RankScope, opts: PropagationOptions) -> Vec<(EntityId, f64)> {
    let products: Vec<EntityId> = match scope {
        RankScope::AllProducts => g.products().cloned().collect(),
        RankScope::RootsOnly => g.roots(),
    };
    let mut propagator = Propagator::new(g);
    let mut totals: BTreeMap<EntityId, CompensatedSum> = BTreeMap::new();
    for p in &products {
        let alloc = propagator.allocation(p, opts).expect("product comes from the graph");
        for (entity, share) in alloc.shares {
            totals.entry(entity).or_default().add(share);
        }
    }
    let mut rows: Vec<(EntityId, f64)> = finish(totals).into_iter().collect();
    sort_ranked(&mut rows);
    rows
}
