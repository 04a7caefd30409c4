//! Domain types for creditmaps: identifiers, categories, entries, products,
//! validation and category-level weight expansion.

mod expand;
mod id;
mod types;
mod validate;

pub use expand::{expand_category_weights, CategoryWeights, ExpandError};
pub use id::{canonicalize_id, validate_orcid_checksum, EntityId, IdError, IdScheme};
pub use types::{Category, CreditEntry, CreditMap, Descriptor, ProductKind, ProductMeta};
pub use validate::{validate_creditmap, Violation, ViolationCode, WEIGHT_TOLERANCE};
