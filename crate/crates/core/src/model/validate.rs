use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::{Category, CreditMap};

/// Absolute tolerance for every weight-sum check.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationCode {
    WeightSum,
    NonPositiveWeight,
    DuplicateEntity,
    NoAuthor,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::WeightSum => "WeightSum",
            ViolationCode::NonPositiveWeight => "NonPositiveWeight",
            ViolationCode::DuplicateEntity => "DuplicateEntity",
            ViolationCode::NoAuthor => "NoAuthor",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Checks the creditmap invariants, returning one violation per failure.
///
/// Order of reported violations: non-positive weights (in entry order),
/// duplicates (in order of the second occurrence), weight sum, missing author.
pub fn validate_creditmap(map: &CreditMap) -> Vec<Violation> {
    let mut out = Vec::new();

    for entry in &map.entries {
        // NaN lands here too
        if !(entry.weight > 0.0) {
            out.push(Violation {
                code: ViolationCode::NonPositiveWeight,
                message: format!("{} ({}) has weight {}", entry.entity, entry.category, entry.weight),
            });
        }
    }

    let mut seen: HashMap<_, Category> = HashMap::new();
    for entry in &map.entries {
        if let Some(first) = seen.insert(&entry.entity, entry.category) {
            out.push(Violation {
                code: ViolationCode::DuplicateEntity,
                message: format!(
                    "{} appears as {} and again as {}",
                    entry.entity, first, entry.category
                ),
            });
        }
    }

    let sum = map.weight_sum();
    if !((sum - 1.0).abs() <= WEIGHT_TOLERANCE) {
        out.push(Violation {
            code: ViolationCode::WeightSum,
            message: format!("weights sum to {sum}, expected 1"),
        });
    }

    if !map.entries.iter().any(|e| e.category == Category::Author) {
        out.push(Violation {
            code: ViolationCode::NoAuthor,
            message: "no entry in category author".to_string(),
        });
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CreditEntry, EntityId, ProductKind, ProductMeta};

    fn id(s: &str) -> EntityId {
        EntityId::parse(s).unwrap()
    }

    fn map(entries: Vec<(&str, Category, f64)>) -> CreditMap {
        CreditMap::new(
            ProductMeta::new(id("doi:10.1/p"), ProductKind::ScholarlyArticle, "P"),
            entries
                .into_iter()
                .map(|(e, c, w)| CreditEntry::new(id(e), c, w))
                .collect(),
        )
    }

    fn codes(m: &CreditMap) -> Vec<ViolationCode> {
        validate_creditmap(m).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn golden_weights_are_valid() {
        let m = map(vec![
            ("orcid:0000-0001-5934-7525", Category::Author, 0.25),
            ("orcid:0000-0002-7217-4494", Category::Author, 0.25),
            ("doi:10.5334/jors.be", Category::Article, 0.3),
            ("https://github.com/arfon/fidgit", Category::Software, 0.04),
            ("orcid:0000-0002-5702-149X", Category::Acknowledgment, 0.01),
            ("http://www.arfon.org/json-ld-for-software-discovery-reuse-and-credit", Category::Other, 0.15),
        ]);
        assert!(validate_creditmap(&m).is_empty());
    }

    #[test]
    fn single_author() {
        assert!(codes(&map(vec![("name:a", Category::Author, 1.0)])).is_empty());
    }

    #[test]
    fn short_sum() {
        let m = map(vec![("name:a", Category::Author, 0.25), ("name:b", Category::Author, 0.25)]);
        let v = validate_creditmap(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, ViolationCode::WeightSum);
        assert!(v[0].message.contains("0.5"));
    }

    #[test]
    fn zero_and_negative_weights() {
        let m = map(vec![
            ("name:a", Category::Author, 1.0),
            ("name:b", Category::Other, 0.0),
        ]);
        assert_eq!(codes(&m), vec![ViolationCode::NonPositiveWeight]);
        let m = map(vec![
            ("name:a", Category::Author, 1.5),
            ("name:b", Category::Other, -0.5),
        ]);
        assert_eq!(codes(&m), vec![ViolationCode::NonPositiveWeight]);
        let m = map(vec![("name:a", Category::Author, f64::NAN)]);
        assert_eq!(codes(&m), vec![ViolationCode::NonPositiveWeight, ViolationCode::WeightSum]);
    }

    #[test]
    fn duplicate_across_categories() {
        let m = map(vec![
            ("name:a", Category::Author, 0.5),
            ("name:a", Category::Acknowledgment, 0.5),
        ]);
        let v = validate_creditmap(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, ViolationCode::DuplicateEntity);
        assert!(v[0].message.contains("author") && v[0].message.contains("acknowledgment"));
    }

    #[test]
    fn no_author_and_empty() {
        let m = map(vec![("doi:10.1/x", Category::Article, 1.0)]);
        assert_eq!(codes(&m), vec![ViolationCode::NoAuthor]);
        let m = map(vec![]);
        assert_eq!(codes(&m), vec![ViolationCode::WeightSum, ViolationCode::NoAuthor]);
    }

    #[test]
    fn tolerance_boundary() {
        let m = map(vec![("name:a", Category::Author, 0.5), ("name:b", Category::Author, 0.5 + 5e-10)]);
        assert!(codes(&m).is_empty());
        let m = map(vec![("name:a", Category::Author, 0.5), ("name:b", Category::Author, 0.5 + 5e-9)]);
        assert_eq!(codes(&m), vec![ViolationCode::WeightSum]);
    }
}
