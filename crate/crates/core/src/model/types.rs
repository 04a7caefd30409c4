use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::EntityId;

/// The five contriponent categories of a creditmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Author,
    Article,
    Software,
    Acknowledgment,
    Other,
}

impl Category {
    /// Document traversal order.
    pub const ALL: [Category; 5] = [
        Category::Author,
        Category::Article,
        Category::Software,
        Category::Acknowledgment,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Author => "author",
            Category::Article => "article",
            Category::Software => "software",
            Category::Acknowledgment => "acknowledgment",
            Category::Other => "other",
        }
    }

    /// Dotted path of the array holding this category in a creditmap document.
    pub fn document_key(self) -> &'static str {
        match self {
            Category::Author => "author",
            Category::Article => "citation.articles",
            Category::Software => "citation.software",
            Category::Acknowledgment => "citation.acknowledgment",
            Category::Other => "citation.other",
        }
    }

    pub fn from_document_key(key: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.document_key() == key)
    }

    /// Author and acknowledgment entries name people; the rest name products.
    pub fn is_person(self) -> bool {
        matches!(self, Category::Author | Category::Acknowledgment)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s || c.document_key() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// Descriptive metadata carried alongside an identifier. None of it affects
/// credit arithmetic; it is kept so documents survive a parse/serialize cycle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Descriptor {
    pub type_tag: Option<String>,
    pub name: Option<String>,
    pub headline: Option<String>,
    pub doi: Option<String>,
    pub email: Option<String>,
    pub code_repository: Option<String>,
    pub url: Option<String>,
    pub license: Option<String>,
    /// Keys outside the profile, in document order (lenient parsing only).
    pub extensions: Vec<(String, Value)>,
}

/// One contriponent of a product.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditEntry {
    pub entity: EntityId,
    pub category: Category,
    pub weight: f64,
    pub display: Descriptor,
}

impl CreditEntry {
    pub fn new(entity: EntityId, category: Category, weight: f64) -> Self {
        CreditEntry { entity, category, weight, display: Descriptor::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductKind {
    ScholarlyArticle,
    Code,
    Dataset,
    BlogPosting,
    Other,
}

impl ProductKind {
    pub fn from_type_tag(tag: &str) -> ProductKind {
        match tag {
            "ScholarlyArticle" => ProductKind::ScholarlyArticle,
            "Code" => ProductKind::Code,
            "Dataset" => ProductKind::Dataset,
            "BlogPosting" => ProductKind::BlogPosting,
            _ => ProductKind::Other,
        }
    }

    pub fn type_tag(self) -> Option<&'static str> {
        match self {
            ProductKind::ScholarlyArticle => Some("ScholarlyArticle"),
            ProductKind::Code => Some("Code"),
            ProductKind::Dataset => Some("Dataset"),
            ProductKind::BlogPosting => Some("BlogPosting"),
            ProductKind::Other => None,
        }
    }
}

/// Metadata of the product a creditmap describes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeta {
    pub id: EntityId,
    pub kind: ProductKind,
    pub headline: String,
    pub date_created: Option<NaiveDate>,
    pub keywords: Option<Vec<String>>,
    /// `type_tag` is only set for [`ProductKind::Other`], holding the raw `@type`.
    pub display: Descriptor,
}

impl ProductMeta {
    pub fn new(id: EntityId, kind: ProductKind, headline: impl Into<String>) -> Self {
        ProductMeta {
            id,
            kind,
            headline: headline.into(),
            date_created: None,
            keywords: None,
            display: Descriptor::default(),
        }
    }
}

/// A product's complete credit declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditMap {
    pub product: ProductMeta,
    pub entries: Vec<CreditEntry>,
    /// Unrecognised keys of the `citation` object, in document order.
    pub citation_extensions: Vec<(String, Value)>,
}

impl CreditMap {
    pub fn new(product: ProductMeta, entries: Vec<CreditEntry>) -> Self {
        CreditMap { product, entries, citation_extensions: Vec::new() }
    }

    pub fn id(&self) -> &EntityId {
        &self.product.id
    }

    pub fn weight_sum(&self) -> f64 {
        crate::sum::compensated_sum(self.entries.iter().map(|e| e.weight))
    }

    pub fn entries_in(&self, category: Category) -> impl Iterator<Item = &CreditEntry> {
        self.entries.iter().filter(move |e| e.category == category)
    }
}
