//! Entity identifiers and their canonical forms.
//!
//! Every person or product that can receive credit is keyed by an
//! [`EntityId`]. Raw identifiers found in documents (ORCID URIs, DOI URIs,
//! repository URLs, e-mail addresses, bare names) are folded into one
//! canonical `<scheme>:<value>` text form so that the same real-world entity
//! is recognised across documents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::Category;

/// Identifier scheme.
///
/// Variants are declared in alphabetical order of their textual names so the
/// derived ordering of [`EntityId`] matches the ordering of its canonical text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdScheme {
    Doi,
    Email,
    Name,
    Orcid,
    Url,
}

impl IdScheme {
    pub const ALL: [IdScheme; 5] = [
        IdScheme::Doi,
        IdScheme::Email,
        IdScheme::Name,
        IdScheme::Orcid,
        IdScheme::Url,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdScheme::Doi => "doi",
            IdScheme::Email => "email",
            IdScheme::Name => "name",
            IdScheme::Orcid => "orcid",
            IdScheme::Url => "url",
        }
    }

    /// Whether the scheme designates a person rather than a product.
    pub fn is_person(self) -> bool {
        matches!(self, IdScheme::Orcid | IdScheme::Email)
    }
}

impl fmt::Display for IdScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("empty identifier")]
    EmptyIdentifier,
    #[error("malformed ORCID {0:?}: check digit mismatch or bad shape")]
    MalformedOrcid(String),
    #[error("{raw:?} is not a valid {scheme} identifier")]
    InvalidForScheme { scheme: IdScheme, raw: String },
}

/// Canonical identifier of a person or product.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId {
    scheme: IdScheme,
    value: String,
}

impl EntityId {
    pub fn scheme(&self) -> IdScheme {
        self.scheme
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    /// Parses any raw identifier, see [`canonicalize_id`].
    pub fn parse(raw: &str) -> Result<Self, IdError> {
        canonicalize_id(raw, None)
    }

    /// Name-scheme identifier derived from free text.
    pub fn from_name(text: &str) -> Result<Self, IdError> {
        let value = normalize_name(text);
        if value.is_empty() {
            return Err(IdError::EmptyIdentifier);
        }
        Ok(EntityId { scheme: IdScheme::Name, value })
    }

    /// Form suitable for a JSON-LD `@id` value that re-canonicalizes to `self`.
    pub fn to_iri(&self) -> String {
        match self.scheme {
            IdScheme::Orcid => format!("http://orcid.org/{}", self.value),
            IdScheme::Doi => format!("https://doi.org/{}", self.value),
            IdScheme::Url => self.value.clone(),
            IdScheme::Email => format!("mailto:{}", self.value),
            IdScheme::Name => self.to_string(),
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scheme, self.value)
    }
}

impl FromStr for EntityId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        canonicalize_id(s, None)
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        canonicalize_id(&raw, None).map_err(serde::de::Error::custom)
    }
}

const ORCID_PREFIXES: [&str; 5] = [
    "https://orcid.org/",
    "http://orcid.org/",
    "https://www.orcid.org/",
    "http://www.orcid.org/",
    "orcid.org/",
];

const DOI_PREFIXES: [&str; 6] = [
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
];

/// Folds a raw identifier into its canonical [`EntityId`].
///
/// Detection runs in precedence order: explicit canonical text
/// (`orcid:`, `url:`, `email:`, `name:`), ORCID, DOI, absolute http(s) URI,
/// e-mail address, and finally a free-text name. `hint` is the category the
/// identifier was found under; `@`-bearing strings only become e-mail
/// identifiers for person categories (or when no hint is given).
pub fn canonicalize_id(raw: &str, hint: Option<Category>) -> Result<EntityId, IdError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(IdError::EmptyIdentifier);
    }

    if let Some((scheme, rest)) = explicit_scheme(raw) {
        return canonicalize_as(scheme, rest.trim(), raw);
    }

    if let Some(rest) = strip_prefix_ci(raw, &ORCID_PREFIXES) {
        return orcid(rest).ok_or_else(|| IdError::MalformedOrcid(raw.to_string()));
    }
    if looks_like_orcid(raw) {
        return orcid(raw).ok_or_else(|| IdError::MalformedOrcid(raw.to_string()));
    }

    if let Some(rest) = strip_prefix_ci(raw, &DOI_PREFIXES) {
        return doi(rest.trim()).ok_or_else(|| IdError::InvalidForScheme {
            scheme: IdScheme::Doi,
            raw: raw.to_string(),
        });
    }
    if let Some(id) = doi(raw) {
        return Ok(id);
    }

    if let Some(id) = url(raw) {
        return Ok(id);
    }

    let person_context = hint.is_none_or(Category::is_person);
    if person_context {
        if let Some(id) = email(raw) {
            return Ok(id);
        }
    }

    EntityId::from_name(raw)
}

fn canonicalize_as(scheme: IdScheme, rest: &str, raw: &str) -> Result<EntityId, IdError> {
    if rest.is_empty() {
        return Err(IdError::EmptyIdentifier);
    }
    let invalid = || IdError::InvalidForScheme { scheme, raw: raw.to_string() };
    match scheme {
        IdScheme::Orcid => {
            let rest = strip_prefix_ci(rest, &ORCID_PREFIXES).unwrap_or(rest);
            orcid(rest).ok_or_else(|| IdError::MalformedOrcid(raw.to_string()))
        }
        IdScheme::Doi => {
            let rest = strip_prefix_ci(rest, &DOI_PREFIXES).unwrap_or(rest);
            doi(rest).ok_or_else(invalid)
        }
        IdScheme::Url => url(rest).ok_or_else(invalid),
        IdScheme::Email => email(rest).ok_or_else(invalid),
        IdScheme::Name => EntityId::from_name(rest),
    }
}

/// `orcid:`, `url:`, `email:`/`mailto:`, `name:` prefixes. `doi:` is handled
/// with the other DOI prefixes.
fn explicit_scheme(raw: &str) -> Option<(IdScheme, &str)> {
    const EXPLICIT: [(&str, IdScheme); 5] = [
        ("orcid:", IdScheme::Orcid),
        ("url:", IdScheme::Url),
        ("email:", IdScheme::Email),
        ("mailto:", IdScheme::Email),
        ("name:", IdScheme::Name),
    ];
    EXPLICIT.iter().find_map(|(prefix, scheme)| {
        strip_prefix_ci(raw, std::slice::from_ref(prefix)).map(|rest| (*scheme, rest))
    })
}

fn strip_prefix_ci<'a>(raw: &'a str, prefixes: &[&str]) -> Option<&'a str> {
    prefixes.iter().find_map(|p| {
        let head = raw.get(..p.len())?;
        head.eq_ignore_ascii_case(p).then(|| &raw[p.len()..])
    })
}

/// `dddd-dddd-dddd-ddd[dX]`, case-insensitive on the check character.
fn looks_like_orcid(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 19 {
        return false;
    }
    b.iter().enumerate().all(|(i, &c)| match i {
        4 | 9 | 14 => c == b'-',
        18 => c.is_ascii_digit() || c == b'X' || c == b'x',
        _ => c.is_ascii_digit(),
    })
}

fn orcid(s: &str) -> Option<EntityId> {
    let s = s.trim().trim_end_matches('/');
    if !looks_like_orcid(s) || !validate_orcid_checksum(s) {
        return None;
    }
    Some(EntityId { scheme: IdScheme::Orcid, value: s.to_ascii_uppercase() })
}

fn doi(s: &str) -> Option<EntityId> {
    let s = s.trim();
    if !s.starts_with("10.") || s.chars().any(char::is_whitespace) {
        return None;
    }
    let (prefix, suffix) = s.split_once('/')?;
    if prefix.len() <= 3 || suffix.is_empty() {
        return None;
    }
    Some(EntityId { scheme: IdScheme::Doi, value: s.to_lowercase() })
}

fn url(s: &str) -> Option<EntityId> {
    if s.chars().any(char::is_whitespace) {
        return None;
    }
    let (scheme, rest) = s.split_once("://")?;
    let scheme = scheme.to_ascii_lowercase();
    if scheme != "http" && scheme != "https" {
        return None;
    }
    let rest = rest.trim_end_matches('/');
    let (host, path) = match rest.find(['/', '?', '#']) {
        Some(i) => rest.split_at(i),
        None => (rest, ""),
    };
    if host.is_empty() {
        return None;
    }
    Some(EntityId {
        scheme: IdScheme::Url,
        value: format!("{scheme}://{}{path}", host.to_ascii_lowercase()),
    })
}

fn email(s: &str) -> Option<EntityId> {
    if s.chars().any(char::is_whitespace) {
        return None;
    }
    let (local, domain) = s.split_once('@')?;
    if local.is_empty() || domain.is_empty() {
        return None;
    }
    Some(EntityId { scheme: IdScheme::Email, value: s.to_lowercase() })
}

fn normalize_name(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// ISO 7064 MOD 11-2 check for a 16-character ORCID (hyphens ignored).
///
/// The running total over the first 15 digits is `t = (t + d) * 2`; the
/// check character is `(12 - t mod 11) mod 11`, with 10 written as `X`.
/// Inputs that are not 15 digits plus a check character return false.
pub fn validate_orcid_checksum(digits: &str) -> bool {
    let chars: Vec<u8> = digits.bytes().filter(|&b| b != b'-').collect();
    if chars.len() != 16 {
        return false;
    }
    let (base, check) = chars.split_at(15);
    let mut total: u32 = 0;
    for &c in base {
        if !c.is_ascii_digit() {
            return false;
        }
        total = (total + u32::from(c - b'0')) * 2 % 11;
    }
    let expected = (12 - total % 11) % 11;
    match check[0] {
        b'X' | b'x' => expected == 10,
        c if c.is_ascii_digit() => expected == u32::from(c - b'0'),
        _ => false,
    }
}
