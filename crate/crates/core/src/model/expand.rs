use std::collections::BTreeMap;

use thiserror::Error;

use super::{Category, CreditEntry, EntityId, WEIGHT_TOLERANCE};
use crate::sum::compensated_sum;

/// Two-level weights: a total per category and a split within each category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryWeights {
    pub totals: BTreeMap<Category, f64>,
    pub within: BTreeMap<Category, Vec<(EntityId, f64)>>,
}

impl CategoryWeights {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style helper: sets a category's total and its within-list.
    pub fn with(mut self, category: Category, total: f64, within: Vec<(EntityId, f64)>) -> Self {
        self.totals.insert(category, total);
        self.within.insert(category, within);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpandError {
    #[error("category totals sum to {0}, expected 1")]
    CategorySumError(f64),
    #[error("weights within {category} sum to {sum}, expected 1")]
    WithinSumError { category: Category, sum: f64 },
    #[error("category {0} has a total but no within-category weights")]
    MissingWithin(Category),
    #[error("category {0} has within-category weights but no total")]
    MissingTotal(Category),
    #[error("non-positive weight {weight} in {category}")]
    NonPositiveWeight { category: Category, weight: f64 },
}

/// Multiplies each within-category weight by its category total.
///
/// Entries come out in category order (author, article, software,
/// acknowledgment, other) and in list order within a category.
pub fn expand_category_weights(cw: &CategoryWeights) -> Result<Vec<CreditEntry>, ExpandError> {
    let total_sum = compensated_sum(cw.totals.values().copied());
    if !((total_sum - 1.0).abs() <= WEIGHT_TOLERANCE) {
        return Err(ExpandError::CategorySumError(total_sum));
    }

    let mut entries = Vec::new();
    for category in Category::ALL {
        let (total, within) = match (cw.totals.get(&category), cw.within.get(&category)) {
            (None, None) => continue,
            (Some(_), None) => return Err(ExpandError::MissingWithin(category)),
            (None, Some(_)) => return Err(ExpandError::MissingTotal(category)),
            (Some(&t), Some(w)) => (t, w),
        };
        if !(total > 0.0) {
            return Err(ExpandError::NonPositiveWeight { category, weight: total });
        }
        let sum = compensated_sum(within.iter().map(|(_, w)| *w));
        if !((sum - 1.0).abs() <= WEIGHT_TOLERANCE) {
            return Err(ExpandError::WithinSumError { category, sum });
        }
        for (entity, w) in within {
            if !(*w > 0.0) {
                return Err(ExpandError::NonPositiveWeight { category, weight: *w });
            }
            entries.push(CreditEntry::new(entity.clone(), category, total * w));
        }
    }
    Ok(entries)
}
