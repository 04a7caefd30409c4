//! Corpus-level credit graph.
//!
//! Every registered creditmap becomes a product node with one out-edge per
//! entry. An entry whose ID matches another registered product links the two
//! products; anything else is a terminal node where credit comes to rest.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{validate_creditmap, Category, CreditMap, EntityId, IdScheme, ProductMeta, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    RegisteredProduct,
    TerminalPerson,
    TerminalProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeInfo {
    pub kind: NodeKind,
    /// Set for registered products.
    pub meta: Option<ProductMeta>,
    /// Human-readable label taken from the first referencing entry.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub target: EntityId,
    pub weight: f64,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("product {0} is registered more than once")]
    DuplicateProductId(EntityId),
    #[error("citation cycle: {}", render_cycle(.0))]
    Cycle(Vec<EntityId>),
    #[error("creditmap for {id} is invalid ({} violation(s))", .violations.len())]
    InvalidMap { id: EntityId, violations: Vec<Violation> },
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::DuplicateProductId(_) => "DuplicateProductId",
            GraphError::Cycle(_) => "CycleError",
            GraphError::InvalidMap { .. } => "ValidationFailed",
        }
    }
}

pub fn render_cycle(cycle: &[EntityId]) -> String {
    cycle.iter().map(ToString::to_string).collect::<Vec<_>>().join(" -> ")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CreditGraph {
    nodes: BTreeMap<EntityId, NodeInfo>,
    edges: BTreeMap<EntityId, Vec<Edge>>,
    warnings: Vec<String>,
}

impl CreditGraph {
    pub fn nodes(&self) -> &BTreeMap<EntityId, NodeInfo> {
        &self.nodes
    }

    pub fn node(&self, id: &EntityId) -> Option<&NodeInfo> {
        self.nodes.get(id)
    }

    /// Out-edges of a registered product, in creditmap entry order.
    pub fn edges(&self, id: &EntityId) -> &[Edge] {
        self.edges.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn all_edges(&self) -> impl Iterator<Item = (&EntityId, &Edge)> {
        self.edges.iter().flat_map(|(src, es)| es.iter().map(move |e| (src, e)))
    }

    pub fn is_registered(&self, id: &EntityId) -> bool {
        matches!(self.nodes.get(id), Some(n) if n.kind == NodeKind::RegisteredProduct)
    }

    /// Registered products in ID order.
    pub fn products(&self) -> impl Iterator<Item = &EntityId> {
        self.edges.keys()
    }

    /// Registered products that no other registered product cites.
    pub fn roots(&self) -> Vec<EntityId> {
        let cited: BTreeSet<&EntityId> = self
            .all_edges()
            .filter(|(_, e)| self.is_registered(&e.target))
            .map(|(_, e)| &e.target)
            .collect();
        self.products().filter(|p| !cited.contains(p)).cloned().collect()
    }

    /// Non-fatal oddities noticed while building (sorted).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Builds the graph from a set of creditmaps.
///
/// Input order does not matter. Every map must validate, product IDs must be
/// distinct and the citation relation among registered products must be
/// acyclic.
pub fn build_graph(maps: &[CreditMap]) -> Result<CreditGraph, GraphError> {
    let mut sorted: Vec<&CreditMap> = maps.iter().collect();
    sorted.sort_by(|a, b| a.product.id.cmp(&b.product.id));
    for pair in sorted.windows(2) {
        if pair[0].product.id == pair[1].product.id {
            return Err(GraphError::DuplicateProductId(pair[0].product.id.clone()));
        }
    }
    for map in &sorted {
        let violations = validate_creditmap(map);
        if !violations.is_empty() {
            return Err(GraphError::InvalidMap { id: map.product.id.clone(), violations });
        }
    }

    let registered: BTreeSet<&EntityId> = sorted.iter().map(|m| &m.product.id).collect();
    let mut graph = CreditGraph::default();

    // a terminal is a person if any reference says so
    let mut person_refs: BTreeSet<&EntityId> = BTreeSet::new();
    let mut labels: BTreeMap<&EntityId, String> = BTreeMap::new();
    for map in &sorted {
        for entry in &map.entries {
            if registered.contains(&entry.entity) {
                continue;
            }
            let orcid = entry.entity.scheme() == IdScheme::Orcid;
            if entry.category.is_person() || orcid {
                person_refs.insert(&entry.entity);
            }
            if orcid && !entry.category.is_person() {
                graph.warnings.push(format!(
                    "{}: ORCID {} listed under {}; treated as a person",
                    map.product.id, entry.entity, entry.category
                ));
            }
            let d = &entry.display;
            if let Some(label) = d.name.as_ref().or(d.headline.as_ref()) {
                labels.entry(&entry.entity).or_insert_with(|| label.clone());
            }
        }
    }

    for map in &sorted {
        let id = &map.product.id;
        graph.nodes.insert(
            id.clone(),
            NodeInfo {
                kind: NodeKind::RegisteredProduct,
                meta: Some(map.product.clone()),
                label: Some(map.product.headline.clone()),
            },
        );
        let mut out = Vec::with_capacity(map.entries.len());
        for entry in &map.entries {
            if !registered.contains(&entry.entity) {
                let kind = if person_refs.contains(&entry.entity) {
                    NodeKind::TerminalPerson
                } else {
                    NodeKind::TerminalProduct
                };
                graph.nodes.entry(entry.entity.clone()).or_insert_with(|| NodeInfo {
                    kind,
                    meta: None,
                    label: labels.get(&entry.entity).cloned(),
                });
            }
            out.push(Edge { target: entry.entity.clone(), weight: entry.weight, category: entry.category });
        }
        graph.edges.insert(id.clone(), out);
    }
    graph.warnings.sort();

    if let Some(cycle) = find_cycle(&graph) {
        return Err(GraphError::Cycle(cycle));
    }
    Ok(graph)
}

/// Depth-first search over registered products in ID order. The witness is
/// rotated to start at its smallest ID and repeats that ID at the end.
fn find_cycle(g: &CreditGraph) -> Option<Vec<EntityId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&EntityId, Mark> = BTreeMap::new();

    for start in g.products() {
        if marks.contains_key(start) {
            continue;
        }
        // (node, index of next edge to explore)
        let mut stack: Vec<(&EntityId, usize)> = vec![(start, 0)];
        marks.insert(start, Mark::Open);
        while let Some(&(node, next)) = stack.last() {
            let edges = g.edges(node);
            if next == edges.len() {
                marks.insert(node, Mark::Done);
                stack.pop();
                continue;
            }
            let target = &edges[next].target;
            if let Some(top) = stack.last_mut() {
                top.1 += 1;
            }
            if !g.is_registered(target) {
                continue;
            }
            match marks.get(target) {
                Some(Mark::Done) => {}
                Some(Mark::Open) => {
                    let from = stack.iter().position(|(n, _)| *n == target).expect("open node is on the stack");
                    let mut cycle: Vec<EntityId> = stack[from..].iter().map(|(n, _)| (*n).clone()).collect();
                    let min = cycle.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
                    cycle.rotate_left(min);
                    cycle.push(cycle[0].clone());
                    return Some(cycle);
                }
                None => {
                    marks.insert(target, Mark::Open);
                    stack.push((target, 0));
                }
            }
        }
    }
    None
}

/// Registered products ordered so each comes after every registered product
/// it cites. Ties go to the smaller canonical ID.
pub fn topological_order(g: &CreditGraph) -> Vec<EntityId> {
    let mut pending: BTreeMap<&EntityId, usize> = BTreeMap::new();
    let mut citers: BTreeMap<&EntityId, Vec<&EntityId>> = BTreeMap::new();
    for product in g.products() {
        let cited: BTreeSet<&EntityId> = g
            .edges(product)
            .iter()
            .map(|e| &e.target)
            .filter(|t| g.is_registered(t))
            .collect();
        pending.insert(product, cited.len());
        for t in cited {
            citers.entry(t).or_default().push(product);
        }
    }

    let mut ready: BTreeSet<&EntityId> = pending.iter().filter(|(_, &n)| n == 0).map(|(p, _)| *p).collect();
    let mut order = Vec::with_capacity(pending.len());
    while let Some(next) = ready.pop_first() {
        order.push(next.clone());
        for citer in citers.get(next).map(Vec::as_slice).unwrap_or(&[]) {
            let n = pending.get_mut(citer).expect("citer is registered");
            *n -= 1;
            if *n == 0 {
                ready.insert(citer);
            }
        }
    }
    order
}

/// Cited products that have no registered creditmap, with the registered
/// products citing each of them.
pub fn dangling_references(g: &CreditGraph) -> Vec<(EntityId, Vec<EntityId>)> {
    let mut out: BTreeMap<&EntityId, BTreeSet<&EntityId>> = BTreeMap::new();
    for (src, edge) in g.all_edges() {
        if matches!(g.node(&edge.target), Some(n) if n.kind == NodeKind::TerminalProduct) {
            out.entry(&edge.target).or_default().insert(src);
        }
    }
    out.into_iter()
        .map(|(id, citers)| (id.clone(), citers.into_iter().cloned().collect()))
        .collect()
}
