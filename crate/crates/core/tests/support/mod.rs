//! Shared test helpers: fixture paths, independent oracles, random corpora.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use credit_ledger::jsonld::{parse_creditmap, ParseMode};
use credit_ledger::model::{Category, CreditEntry, CreditMap, EntityId, ProductKind, ProductMeta};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> Vec<u8> {
    std::fs::read(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn parse_fixture(rel: &str) -> CreditMap {
    parse_creditmap(&read_fixture(rel), ParseMode::Lenient).unwrap().0
}

pub fn id(s: &str) -> EntityId {
    EntityId::parse(s).unwrap()
}

pub const DEV1: &str = "orcid:0000-0001-0000-0009";
pub const DEV2: &str = "orcid:0000-0001-0000-0017";
pub const DEV3: &str = "orcid:0000-0001-0000-0025";
pub const AUTHOR_B: &str = "orcid:0000-0001-0000-0033";
pub const AUTHOR_C: &str = "orcid:0000-0001-0000-0041";
pub const PRODUCT_A: &str = "doi:10.9999/a";
pub const PRODUCT_B: &str = "doi:10.9999/b";
pub const PRODUCT_C: &str = "doi:10.9999/c";

pub fn libs() -> Vec<EntityId> {
    (1..=4).map(|i| id(&format!("https://github.com/example/lib{i}"))).collect()
}

pub fn transitive_corpus() -> Vec<CreditMap> {
    ["transitive/a.jsonld", "transitive/b.jsonld", "transitive/c.jsonld"]
        .iter()
        .map(|f| parse_fixture(f))
        .collect()
}

/// ISO 7064 MOD 11-2 in its positional form: with the check character
/// valued 10 for `X`, a valid identifier satisfies
/// `sum(d_i * 2^(15 - i)) mod 11 == 1` over all sixteen characters.
pub fn orcid_oracle(orcid: &str) -> bool {
    let chars: Vec<char> = orcid.chars().filter(|&c| c != '-').collect();
    if chars.len() != 16 {
        return false;
    }
    let mut sum: u64 = 0;
    for (i, c) in chars.iter().enumerate() {
        let d = match c {
            '0'..='9' => c.to_digit(10).unwrap() as u64,
            'X' if i == 15 => 10,
            _ => return false,
        };
        sum += d * (1u64 << (15 - i));
    }
    sum % 11 == 1
}

/// Explicit enumeration of every citation path from `product`.
///
/// Registered products at depth `max_depth` are reported as terminals.
pub fn all_paths_oracle(maps: &[CreditMap], product: &EntityId, max_depth: Option<usize>) -> BTreeMap<EntityId, f64> {
    let by_id: BTreeMap<&EntityId, &CreditMap> = maps.iter().map(|m| (&m.product.id, m)).collect();
    let mut out = BTreeMap::new();
    fn walk(
        by_id: &BTreeMap<&EntityId, &CreditMap>,
        node: &EntityId,
        weight: f64,
        depth: usize,
        max_depth: Option<usize>,
        out: &mut BTreeMap<EntityId, f64>,
    ) {
        for entry in &by_id[node].entries {
            let w = weight * entry.weight;
            let registered = by_id.contains_key(&entry.entity);
            if registered && max_depth.is_none_or(|d| depth + 1 < d) {
                walk(by_id, &entry.entity, w, depth + 1, max_depth, out);
            } else {
                *out.entry(entry.entity.clone()).or_insert(0.0) += w;
            }
        }
    }
    walk(&by_id, product, 1.0, 0, max_depth, &mut out);
    out
}

/// Random point on the simplex with `n` coordinates, all positive.
pub fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-6).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// A random acyclic corpus.
///
/// Products are created in a hidden topological order and may only cite
/// earlier products; IDs are shuffled so that order is not visible in the ID
/// text. Each map has one to `max_entries` entries, at least one of them an
/// author, drawn from a shared pool of people and unregistered products so
/// that terminals recur across maps.
pub fn random_corpus<R: Rng>(rng: &mut R, max_products: usize, max_entries: usize) -> Vec<CreditMap> {
    let n = rng.gen_range(1..=max_products);
    let mut ids: Vec<EntityId> = (0..n).map(|i| id(&format!("doi:10.5555/p{i}"))).collect();
    ids.shuffle(rng);
    let people: Vec<EntityId> = (0..12).map(|i| id(&format!("name:person {i}"))).collect();
    let outside: Vec<EntityId> = (0..6).map(|i| id(&format!("https://example.org/tool{i}"))).collect();

    let mut maps = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.gen_range(1..=max_entries);
        let weights = simplex(rng, k);
        let mut used: Vec<EntityId> = Vec::new();
        let mut entries = Vec::with_capacity(k);
        for (j, w) in weights.into_iter().enumerate() {
            let (entity, category) = loop {
                let pick = if j == 0 { 0 } else { rng.gen_range(0..4) };
                let candidate = match pick {
                    0 => (people.choose(rng).unwrap().clone(), Category::Author),
                    1 if i > 0 => (ids[rng.gen_range(0..i)].clone(), Category::Article),
                    2 => (outside.choose(rng).unwrap().clone(), Category::Software),
                    _ => (people.choose(rng).unwrap().clone(), Category::Acknowledgment),
                };
                if !used.contains(&candidate.0) {
                    break candidate;
                }
            };
            used.push(entity.clone());
            entries.push(CreditEntry::new(entity, category, w));
        }
        // entries must be in document order for round-tripping
        entries.sort_by_key(|e| Category::ALL.iter().position(|c| *c == e.category));
        maps.push(CreditMap::new(
            ProductMeta::new(ids[i].clone(), ProductKind::ScholarlyArticle, format!("product {i}")),
            entries,
        ));
    }
    maps.shuffle(rng);
    maps
}

/// Pure chain `P_n -> P_{n-1} -> ... -> P_0`; P_0's author `leaf` holds
/// `leaf_weight`. Returns the maps and the chain edge weights.
pub fn chain<R: Rng>(rng: &mut R, len: usize) -> (Vec<CreditMap>, Vec<f64>, f64) {
    let leaf = id("orcid:0000-0002-1825-0097");
    let leaf_weight = rng.gen_range(0.05..0.95);
    let mut maps = Vec::new();
    let mut weights = Vec::new();
    let p0 = id("doi:10.7777/p0");
    maps.push(CreditMap::new(
        ProductMeta::new(p0, ProductKind::Code, "p0"),
        vec![
            CreditEntry::new(leaf.clone(), Category::Author, leaf_weight),
            CreditEntry::new(id("name:someone else"), Category::Author, 1.0 - leaf_weight),
        ],
    ));
    for i in 1..=len {
        let w = rng.gen_range(0.01..0.99);
        weights.push(w);
        maps.push(CreditMap::new(
            ProductMeta::new(id(&format!("doi:10.7777/p{i}")), ProductKind::ScholarlyArticle, format!("p{i}")),
            vec![
                CreditEntry::new(id(&format!("name:author {i}")), Category::Author, 1.0 - w),
                CreditEntry::new(id(&format!("doi:10.7777/p{}", i - 1)), Category::Article, w),
            ],
        ));
    }
    (maps, weights, leaf_weight)
}
