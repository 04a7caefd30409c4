//! The creditmap document profile: a constrained JSON-LD shape with a
//! schema.org context, an `author` list, a `citation` object holding
//! `articles`, `software`, `acknowledgment` and `other` arrays, and a
//! `creditWeight` on every entry.
//!
//! This is not a general JSON-LD processor. `@context` must be the literal
//! string `http://schema.org` and nothing is expanded or compacted.

use std::fmt;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{
    canonicalize_id, Category, CreditEntry, CreditMap, Descriptor, EntityId, IdError, IdScheme,
    ProductKind, ProductMeta,
};

pub const SCHEMA_ORG_CONTEXT: &str = "http://schema.org";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Unrecognised keys and `@type` values are errors.
    Strict,
    /// Unrecognised keys are kept verbatim and reported as warnings.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WarningCode {
    UnknownKey,
    UnknownType,
    MissingType,
    PersonIdInProductCategory,
    NoPersistentId,
}

impl WarningCode {
    pub fn as_str(self) -> &'static str {
        match self {
            WarningCode::UnknownKey => "UnknownKey",
            WarningCode::UnknownType => "UnknownType",
            WarningCode::MissingType => "MissingType",
            WarningCode::PersonIdInProductCategory => "PersonIdInProductCategory",
            WarningCode::NoPersistentId => "NoPersistentId",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub code: WarningCode,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("@context must be the string \"http://schema.org\"")]
    MissingContext,
    #[error("{path}: entry has no creditWeight")]
    MissingCreditWeight { path: String },
    #[error("{path}: unrecognised key")]
    UnknownKey { path: String },
    #[error("{path}: creditWeight {value} is not a decimal in (0, 1]")]
    WeightParse { path: String, value: String },
    #[error("{path}: missing @type")]
    MissingType { path: String },
    #[error("{path}: unrecognised @type {type_tag:?}")]
    UnknownType { path: String, type_tag: String },
    #[error("{path}: expected {expected}")]
    InvalidStructure { path: String, expected: &'static str },
    #[error("{path}: {source}")]
    InvalidIdentifier { path: String, source: IdError },
    #[error("{path}: entry has no identifier, name or headline")]
    MissingIdentity { path: String },
    #[error("document has neither headline nor name")]
    MissingHeadline,
    #[error("{path}: {value:?} is not an ISO-8601 date")]
    InvalidDate { path: String, value: String },
}

impl ParseError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax(_) => "SyntaxError",
            ParseError::MissingContext => "MissingContext",
            ParseError::MissingCreditWeight { .. } => "MissingCreditWeight",
            ParseError::UnknownKey { .. } => "UnknownKey",
            ParseError::WeightParse { .. } => "WeightParseError",
            ParseError::MissingType { .. } => "MissingType",
            ParseError::UnknownType { .. } => "UnknownType",
            ParseError::InvalidStructure { .. } => "InvalidStructure",
            ParseError::InvalidIdentifier { source, .. } => match source {
                IdError::MalformedOrcid(_) => "MalformedOrcid",
                IdError::EmptyIdentifier => "EmptyIdentifier",
                IdError::InvalidForScheme { .. } => "InvalidIdentifier",
            },
            ParseError::MissingIdentity { .. } => "MissingIdentity",
            ParseError::MissingHeadline => "MissingHeadline",
            ParseError::InvalidDate { .. } => "InvalidDate",
        }
    }
}

const PRODUCT_KEYS: [&str; 14] = [
    "@context",
    "@type",
    "@id",
    "headline",
    "name",
    "dateCreated",
    "keywords",
    "doi",
    "codeRepository",
    "url",
    "license",
    "author",
    "citation",
    "email",
];

const ENTRY_KEYS: [&str; 10] = [
    "@type",
    "@id",
    "name",
    "headline",
    "doi",
    "email",
    "codeRepository",
    "url",
    "license",
    "creditWeight",
];

const CITATION_KEYS: [(&str, Category); 4] = [
    ("articles", Category::Article),
    ("software", Category::Software),
    ("acknowledgment", Category::Acknowledgment),
    ("other", Category::Other),
];

struct Parser {
    mode: ParseMode,
    warnings: Vec<Warning>,
}

/// Parses a creditmap document.
///
/// Entries are returned author-first, then `citation.articles`,
/// `citation.software`, `citation.acknowledgment` and `citation.other`, each
/// in document order. The map is not validated; see
/// [`crate::model::validate_creditmap`].
pub fn parse_creditmap(text: &[u8], mode: ParseMode) -> Result<(CreditMap, Vec<Warning>), ParseError> {
    let text = std::str::from_utf8(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    let root: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    let mut parser = Parser { mode, warnings: Vec::new() };
    let map = parser.document(&root)?;
    Ok((map, parser.warnings))
}

impl Parser {
    fn document(&mut self, root: &Value) -> Result<CreditMap, ParseError> {
        let obj = root.as_object().ok_or_else(|| ParseError::InvalidStructure {
            path: "$".into(),
            expected: "a JSON object",
        })?;

        match obj.get("@context") {
            Some(Value::String(ctx)) if ctx == SCHEMA_ORG_CONTEXT => {}
            _ => return Err(ParseError::MissingContext),
        }

        let mut display = Descriptor::default();
        for (key, value) in obj {
            if !PRODUCT_KEYS.contains(&key.as_str()) {
                self.unknown_key(key, key, value, &mut display.extensions)?;
            }
        }

        let kind = match opt_str(obj, "@type", "@type")? {
            Some(tag) => {
                let kind = ProductKind::from_type_tag(tag);
                if kind == ProductKind::Other {
                    self.unknown_type("@type", tag)?;
                    display.type_tag = Some(tag.to_string());
                }
                kind
            }
            None => {
                if self.mode == ParseMode::Strict {
                    return Err(ParseError::MissingType { path: "$".into() });
                }
                self.warn(WarningCode::MissingType, "$", "document has no @type".into());
                ProductKind::Other
            }
        };

        let headline_field = opt_str(obj, "headline", "headline")?;
        let name_field = opt_str(obj, "name", "name")?;
        let headline = match (headline_field, name_field) {
            (Some(h), name) => {
                display.name = name.map(str::to_string);
                h.to_string()
            }
            (None, Some(n)) => n.to_string(),
            (None, None) => return Err(ParseError::MissingHeadline),
        };

        let date_created = opt_str(obj, "dateCreated", "dateCreated")?
            .map(|raw| {
                NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|_| ParseError::InvalidDate {
                    path: "dateCreated".into(),
                    value: raw.to_string(),
                })
            })
            .transpose()?;

        let keywords = match obj.get("keywords") {
            None => None,
            Some(Value::String(s)) => Some(
                s.split(',')
                    .map(str::trim)
                    .filter(|k| !k.is_empty())
                    .map(str::to_string)
                    .collect(),
            ),
            Some(Value::Array(items)) => Some(
                items
                    .iter()
                    .map(|v| v.as_str().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| invalid("keywords", "a string or an array of strings"))?,
            ),
            Some(_) => return Err(invalid("keywords", "a string or an array of strings")),
        };

        display.doi = opt_string(obj, "doi", "doi")?;
        display.email = opt_string(obj, "email", "email")?;
        display.code_repository = opt_string(obj, "codeRepository", "codeRepository")?;
        display.url = opt_string(obj, "url", "url")?;
        display.license = opt_string(obj, "license", "license")?;

        let at_id = opt_str(obj, "@id", "@id")?;
        let id = identity(at_id, &display, &[headline.as_str()], None, "$")?
            .ok_or(ParseError::MissingHeadline)?;

        let mut entries = Vec::new();
        if let Some(authors) = obj.get("author") {
            for (i, item) in one_or_many(authors, "author")?.into_iter().enumerate() {
                let path = indexed("author", i, authors.is_array());
                entries.push(self.entry(item, Category::Author, &path)?);
            }
        }

        let mut citation_extensions = Vec::new();
        if let Some(citation) = obj.get("citation") {
            let cobj = citation
                .as_object()
                .ok_or_else(|| invalid("citation", "an object of category arrays"))?;
            for (key, value) in cobj {
                if !CITATION_KEYS.iter().any(|(k, _)| k == key) {
                    let path = format!("citation.{key}");
                    self.unknown_key(key, &path, value, &mut citation_extensions)?;
                }
            }
            for (key, category) in CITATION_KEYS {
                let Some(list) = cobj.get(key) else { continue };
                let base = format!("citation.{key}");
                for (i, item) in one_or_many(list, &base)?.into_iter().enumerate() {
                    let path = indexed(&base, i, list.is_array());
                    entries.push(self.entry(item, category, &path)?);
                }
            }
        }

        let product = ProductMeta { id, kind, headline, date_created, keywords, display };
        Ok(CreditMap { product, entries, citation_extensions })
    }

    fn entry(&mut self, value: &Value, category: Category, path: &str) -> Result<CreditEntry, ParseError> {
        let obj = value
            .as_object()
            .ok_or_else(|| invalid(path, "an entry object"))?;

        let mut display = Descriptor::default();
        for (key, v) in obj {
            if !ENTRY_KEYS.contains(&key.as_str()) {
                self.unknown_key(key, &format!("{path}.{key}"), v, &mut display.extensions)?;
            }
        }

        let field = |key: &str| opt_string(obj, key, &format!("{path}.{key}"));
        display.type_tag = field("@type")?;
        display.name = field("name")?;
        display.headline = field("headline")?;
        display.doi = field("doi")?;
        display.email = field("email")?;
        display.code_repository = field("codeRepository")?;
        display.url = field("url")?;
        display.license = field("license")?;

        let at_id = opt_str(obj, "@id", &format!("{path}.@id"))?;
        let fallbacks: Vec<&str> = [display.name.as_deref(), display.headline.as_deref()]
            .into_iter()
            .flatten()
            .collect();
        let entity = identity(at_id, &display, &fallbacks, Some(category), path)?
            .ok_or_else(|| ParseError::MissingIdentity { path: path.to_string() })?;

        if !category.is_person() && entity.scheme() == IdScheme::Orcid {
            self.warn(
                WarningCode::PersonIdInProductCategory,
                path,
                format!("ORCID {entity} listed under {category}; treated as a person"),
            );
        }

        let weight = match obj.get("creditWeight") {
            None => return Err(ParseError::MissingCreditWeight { path: path.to_string() }),
            Some(v) => parse_weight(v, &format!("{path}.creditWeight"))?,
        };

        Ok(CreditEntry { entity, category, weight, display })
    }

    fn unknown_key(
        &mut self,
        key: &str,
        path: &str,
        value: &Value,
        keep: &mut Vec<(String, Value)>,
    ) -> Result<(), ParseError> {
        if self.mode == ParseMode::Strict {
            return Err(ParseError::UnknownKey { path: path.to_string() });
        }
        self.warn(WarningCode::UnknownKey, path, format!("unrecognised key {key:?} kept verbatim"));
        keep.push((key.to_string(), value.clone()));
        Ok(())
    }

    fn unknown_type(&mut self, path: &str, tag: &str) -> Result<(), ParseError> {
        if self.mode == ParseMode::Strict {
            return Err(ParseError::UnknownType { path: path.to_string(), type_tag: tag.to_string() });
        }
        self.warn(WarningCode::UnknownType, path, format!("@type {tag:?} treated as product kind other"));
        Ok(())
    }

    fn warn(&mut self, code: WarningCode, path: &str, message: String) {
        self.warnings.push(Warning { code, path: path.to_string(), message });
    }
}

fn invalid(path: &str, expected: &'static str) -> ParseError {
    ParseError::InvalidStructure { path: path.to_string(), expected }
}

fn indexed(base: &str, i: usize, is_array: bool) -> String {
    if is_array {
        format!("{base}[{i}]")
    } else {
        base.to_string()
    }
}

fn one_or_many<'a>(value: &'a Value, path: &str) -> Result<Vec<&'a Value>, ParseError> {
    match value {
        Value::Array(items) => Ok(items.iter().collect()),
        Value::Object(_) => Ok(vec![value]),
        _ => Err(invalid(path, "an object or an array of objects")),
    }
}

fn opt_str<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<Option<&'a str>, ParseError> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(invalid(path, "a string")),
    }
}

fn opt_string(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<String>, ParseError> {
    Ok(opt_str(obj, key, path)?.map(str::to_string))
}

fn parse_weight(value: &Value, path: &str) -> Result<f64, ParseError> {
    let (weight, raw) = match value {
        Value::String(s) => (s.trim().parse::<f64>().ok(), s.clone()),
        Value::Number(n) => (n.as_f64(), n.to_string()),
        other => (None, other.to_string()),
    };
    match weight {
        Some(w) if w.is_finite() && w > 0.0 && w <= 1.0 => Ok(w),
        _ => Err(ParseError::WeightParse { path: path.to_string(), value: raw }),
    }
}

fn non_blank(s: Option<&str>) -> Option<&str> {
    s.filter(|v| !v.trim().is_empty())
}

/// Identifier precedence: `@id` > `doi` > `codeRepository` > `url` > `email`
/// > names. Only the winning field is canonicalized. Blank fields are skipped.
fn identity(
    at_id: Option<&str>,
    d: &Descriptor,
    names: &[&str],
    hint: Option<Category>,
    path: &str,
) -> Result<Option<EntityId>, ParseError> {
    let wrap = |key: &str| {
        let path = if path == "$" { key.to_string() } else { format!("{path}.{key}") };
        move |source| ParseError::InvalidIdentifier { path, source }
    };
    if let Some(raw) = non_blank(at_id) {
        return canonicalize_id(raw, hint).map(Some).map_err(wrap("@id"));
    }
    if let Some(raw) = non_blank(d.doi.as_deref()) {
        return canonicalize_id(&format!("doi:{}", raw.trim()), hint)
            .map(Some)
            .map_err(wrap("doi"));
    }
    if let Some(raw) = non_blank(d.code_repository.as_deref()) {
        return canonicalize_id(raw, hint).map(Some).map_err(wrap("codeRepository"));
    }
    if let Some(raw) = non_blank(d.url.as_deref()) {
        return canonicalize_id(raw, hint).map(Some).map_err(wrap("url"));
    }
    if let Some(raw) = non_blank(d.email.as_deref()) {
        let raw = raw.trim();
        let explicit = if raw.to_ascii_lowercase().starts_with("mailto:") {
            raw.to_string()
        } else {
            format!("email:{raw}")
        };
        return canonicalize_id(&explicit, hint).map(Some).map_err(wrap("email"));
    }
    for name in names {
        if non_blank(Some(name)).is_some() {
            return EntityId::from_name(name).map(Some).map_err(wrap("name"));
        }
    }
    Ok(None)
}

/// Whether the descriptor fields alone re-derive `id`.
fn derivable(id: &EntityId, d: &Descriptor, names: &[&str], hint: Option<Category>) -> bool {
    matches!(identity(None, d, names, hint, "$"), Ok(Some(ref derived)) if derived == id)
}

/// Renders a creditmap in the document profile.
///
/// Keys come out in a fixed order, weights as the shortest decimal string
/// that parses back to the same double, with 2-space indentation and a
/// trailing newline. `@id` is only written where the other fields would not
/// re-derive the same identifier.
pub fn serialize_creditmap(map: &CreditMap) -> Vec<u8> {
    let product = &map.product;
    let pd = &product.display;
    let mut root = Map::new();
    root.insert("@context".into(), SCHEMA_ORG_CONTEXT.into());
    if let Some(tag) = product.kind.type_tag().or(pd.type_tag.as_deref()) {
        root.insert("@type".into(), tag.into());
    }
    if !derivable(&product.id, pd, &[product.headline.as_str()], None) {
        root.insert("@id".into(), product.id.to_iri().into());
    }
    root.insert("headline".into(), product.headline.clone().into());
    put(&mut root, "name", &pd.name);
    if let Some(date) = product.date_created {
        root.insert("dateCreated".into(), date.format("%Y-%m-%d").to_string().into());
    }
    if let Some(keywords) = &product.keywords {
        root.insert("keywords".into(), keywords_value(keywords));
    }
    put(&mut root, "doi", &pd.doi);
    put(&mut root, "email", &pd.email);
    put(&mut root, "codeRepository", &pd.code_repository);
    put(&mut root, "url", &pd.url);
    put(&mut root, "license", &pd.license);
    for (k, v) in &pd.extensions {
        root.insert(k.clone(), v.clone());
    }

    let authors: Vec<Value> = map.entries_in(Category::Author).map(entry_value).collect();
    if !authors.is_empty() {
        root.insert("author".into(), Value::Array(authors));
    }

    let mut citation = Map::new();
    for (key, category) in CITATION_KEYS {
        let items: Vec<Value> = map.entries_in(category).map(entry_value).collect();
        if !items.is_empty() {
            citation.insert(key.into(), Value::Array(items));
        }
    }
    for (k, v) in &map.citation_extensions {
        citation.insert(k.clone(), v.clone());
    }
    if !citation.is_empty() {
        root.insert("citation".into(), Value::Object(citation));
    }

    let mut out = serde_json::to_vec_pretty(&Value::Object(root)).expect("in-memory JSON serialization");
    out.push(b'\n');
    out
}

fn entry_value(entry: &CreditEntry) -> Value {
    let d = &entry.display;
    let mut obj = Map::new();
    put(&mut obj, "@type", &d.type_tag);
    put(&mut obj, "name", &d.name);
    put(&mut obj, "headline", &d.headline);
    let names: Vec<&str> = [d.name.as_deref(), d.headline.as_deref()].into_iter().flatten().collect();
    if !derivable(&entry.entity, d, &names, Some(entry.category)) {
        obj.insert("@id".into(), entry.entity.to_iri().into());
    }
    put(&mut obj, "doi", &d.doi);
    put(&mut obj, "email", &d.email);
    put(&mut obj, "codeRepository", &d.code_repository);
    put(&mut obj, "url", &d.url);
    put(&mut obj, "license", &d.license);
    for (k, v) in &d.extensions {
        obj.insert(k.clone(), v.clone());
    }
    obj.insert("creditWeight".into(), format_weight(entry.weight).into());
    Value::Object(obj)
}

fn put(obj: &mut Map<String, Value>, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        obj.insert(key.to_string(), v.clone().into());
    }
}

/// A keyword list is written as one comma-separated string when that form
/// parses back to the same list, and as an array otherwise.
fn keywords_value(keywords: &[String]) -> Value {
    let joinable = !keywords.is_empty()
        && keywords
            .iter()
            .all(|k| !k.is_empty() && !k.contains(',') && k.trim() == k);
    if joinable {
        keywords.join(", ").into()
    } else {
        Value::Array(keywords.iter().cloned().map(Value::from).collect())
    }
}

/// Shortest decimal string that parses back to `weight`.
pub fn format_weight(weight: f64) -> String {
    format!("{weight}")
}
