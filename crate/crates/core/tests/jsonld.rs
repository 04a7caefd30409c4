mod support;

use credit_ledger::jsonld::{parse_creditmap, serialize_creditmap, ParseError, ParseMode, WarningCode};
use credit_ledger::model::{validate_creditmap, Category, CreditEntry, CreditMap, Descriptor, EntityId, IdScheme, ProductKind, ProductMeta};
use proptest::prelude::*;
use support::*;

fn lenient(text: &str) -> Result<CreditMap, ParseError> {
    parse_creditmap(text.as_bytes(), ParseMode::Lenient).map(|(m, _)| m)
}

fn strict(text: &str) -> Result<CreditMap, ParseError> {
    parse_creditmap(text.as_bytes(), ParseMode::Strict).map(|(m, _)| m)
}

#[test]
fn golden_creditmap_parses() {
    let (map, warnings) = parse_creditmap(&read_fixture("golden/creditmap.jsonld"), ParseMode::Strict).unwrap();
    assert!(warnings.is_empty(), "{warnings:?}");
    assert!(validate_creditmap(&map).is_empty());

    assert_eq!(map.product.kind, ProductKind::ScholarlyArticle);
    assert_eq!(map.product.headline, "Implementing Transitive Credit with JSON-LD");
    assert_eq!(map.product.id.to_string(), "name:implementing transitive credit with json-ld");
    assert_eq!(map.product.date_created.unwrap().to_string(), "2014-07-10");
    assert_eq!(
        map.product.keywords.as_deref().unwrap(),
        ["transitive credit", "credit for code", "json-ld", "linked data"]
    );

    let rows: Vec<(String, Category, f64)> =
        map.entries.iter().map(|e| (e.entity.to_string(), e.category, e.weight)).collect();
    assert_eq!(
        rows,
        vec![
            ("orcid:0000-0001-5934-7525".into(), Category::Author, 0.25),
            ("orcid:0000-0002-7217-4494".into(), Category::Author, 0.25),
            ("doi:10.5334/jors.be".into(), Category::Article, 0.3),
            ("url:https://github.com/arfon/fidgit".into(), Category::Software, 0.04),
            ("orcid:0000-0002-5702-149X".into(), Category::Acknowledgment, 0.01),
            (
                "url:http://www.arfon.org/json-ld-for-software-discovery-reuse-and-credit".into(),
                Category::Other,
                0.15
            ),
        ]
    );
    let katz = &map.entries[0].display;
    assert_eq!(katz.name.as_deref(), Some("Daniel S. Katz"));
    assert_eq!(katz.email.as_deref(), Some("d.katz@ieee.org"));
    assert_eq!(map.entries[3].display.license.as_deref(), Some("http://opensource.org/licenses/MIT"));
}

#[test]
fn verbatim_listing_is_not_json() {
    // the printed listing drops a comma after the first author's email
    let err = parse_creditmap(&read_fixture("golden/creditmap-verbatim.jsonld"), ParseMode::Lenient).unwrap_err();
    assert_eq!(err.code(), "SyntaxError");
}

#[test]
fn serialization_is_byte_stable() {
    let once = serialize_creditmap(&parse_fixture("golden/creditmap.jsonld"));
    let twice = serialize_creditmap(&parse_creditmap(&once, ParseMode::Strict).unwrap().0);
    assert_eq!(String::from_utf8(once.clone()).unwrap(), String::from_utf8(twice).unwrap());
    let text = String::from_utf8(once).unwrap();
    assert!(text.ends_with("}\n"));
    assert!(text.contains("\n  \"author\": [\n    {\n      \"@type\": \"Person\""));
    assert!(text.contains("\"creditWeight\": \"0.04\""));
    // keys of the first author in the same order as the golden listing
    let katz = &text[text.find("Daniel").unwrap() - 40..text.find("d.katz").unwrap() + 40];
    let order: Vec<usize> = ["\"@type\"", "\"name\"", "\"@id\"", "\"email\"", "\"creditWeight\""]
        .iter()
        .map(|k| katz.find(k).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{katz}");
}

#[test]
fn round_trip_keeps_entries() {
    let map = parse_fixture("golden/creditmap.jsonld");
    let again = parse_creditmap(&serialize_creditmap(&map), ParseMode::Strict).unwrap().0;
    assert_eq!(again.entries, map.entries);
    assert_eq!(again, map);
}

#[test]
fn top_level_key_order() {
    let text = String::from_utf8(serialize_creditmap(&parse_fixture("golden/creditmap.jsonld"))).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    assert_eq!(keys, ["@context", "@type", "headline", "dateCreated", "keywords", "author", "citation"]);
}

#[test]
fn minimal_single_author() {
    let doc = r#"{"@context":"http://schema.org","@type":"ScholarlyArticle","headline":"X","author":{"@type":"Person","name":"A","creditWeight":"1.0"}}"#;
    let map = strict(doc).unwrap();
    assert_eq!(map.entries.len(), 1);
    assert_eq!(map.entries[0].entity.to_string(), "name:a");
    assert_eq!(map.entries[0].category, Category::Author);
    assert_eq!(map.entries[0].weight, 1.0);
    let out = String::from_utf8(serialize_creditmap(&map)).unwrap();
    assert!(out.contains("\"creditWeight\": \"1\""));
    assert_eq!(strict(&out).unwrap(), map);
}

#[test]
fn person_snippet_as_author() {
    let person: serde_json::Value = serde_json::from_slice(&read_fixture("golden/person.jsonld")).unwrap();
    let mut author = person.as_object().unwrap().clone();
    author.remove("@context");
    author.insert("creditWeight".into(), "1".into());
    let doc = serde_json::json!({
        "@context": "http://schema.org",
        "@type": "ScholarlyArticle",
        "headline": "Single author",
        "author": author,
    });
    let map = strict(&doc.to_string()).unwrap();
    assert_eq!(map.entries[0].entity.to_string(), "orcid:0000-0001-5934-7525");
    assert_eq!(map.entries[0].display.name.as_deref(), Some("Daniel S. Katz"));
}

#[test]
fn person_snippet_is_not_a_creditmap() {
    let text = read_fixture("golden/person.jsonld");
    let err = parse_creditmap(&text, ParseMode::Strict).unwrap_err();
    assert!(matches!(err, ParseError::UnknownType { ref type_tag, .. } if type_tag == "Person"));
    let (map, warnings) = parse_creditmap(&text, ParseMode::Lenient).unwrap();
    assert_eq!(map.product.kind, ProductKind::Other);
    assert_eq!(map.product.id.to_string(), "orcid:0000-0001-5934-7525");
    assert!(warnings.iter().any(|w| w.code == WarningCode::UnknownType));
    assert!(map.entries.is_empty());
}

#[test]
fn missing_context() {
    let mut doc: serde_json::Value = serde_json::from_slice(&read_fixture("golden/creditmap.jsonld")).unwrap();
    doc.as_object_mut().unwrap().remove("@context");
    assert_eq!(lenient(&doc.to_string()), Err(ParseError::MissingContext));
    doc["@context"] = "https://schema.org/".into();
    assert_eq!(lenient(&doc.to_string()), Err(ParseError::MissingContext));
    doc["@context"] = serde_json::json!({"@vocab": "http://schema.org/"});
    assert_eq!(lenient(&doc.to_string()), Err(ParseError::MissingContext));
}

const HEAD: &str = r#""@context":"http://schema.org","@type":"ScholarlyArticle","headline":"X""#;

#[test]
fn error_codes() {
    let cases = [
        ("{", "SyntaxError"),
        ("[]", "InvalidStructure"),
        (&format!(r#"{{{HEAD},"author":[{{"name":"A"}}]}}"#), "MissingCreditWeight"),
        (&format!(r#"{{{HEAD},"author":[{{"name":"A","creditWeight":"lots"}}]}}"#), "WeightParseError"),
        (&format!(r#"{{{HEAD},"author":[{{"name":"A","creditWeight":"0"}}]}}"#), "WeightParseError"),
        (&format!(r#"{{{HEAD},"author":[{{"name":"A","creditWeight":1.5}}]}}"#), "WeightParseError"),
        (&format!(r#"{{{HEAD},"author":[{{"name":"A","creditWeight":"NaN"}}]}}"#), "WeightParseError"),
        (&format!(r#"{{{HEAD},"author":[{{"name":"A","creditWeight":true}}]}}"#), "WeightParseError"),
        (&format!(r#"{{{HEAD},"author":[{{"creditWeight":"1"}}]}}"#), "MissingIdentity"),
        (&format!(r#"{{{HEAD},"author":["A"]}}"#), "InvalidStructure"),
        (&format!(r#"{{{HEAD},"author":[{{"@id":"http://orcid.org/0000-0001-5934-7526","creditWeight":"1"}}]}}"#), "MalformedOrcid"),
        (&format!(r#"{{{HEAD},"citation":[]}}"#), "InvalidStructure"),
        (&format!(r#"{{{HEAD},"dateCreated":"July 2014"}}"#), "InvalidDate"),
        (r#"{"@context":"http://schema.org","@type":"ScholarlyArticle"}"#, "MissingHeadline"),
    ];
    for (doc, code) in cases {
        let err = lenient(doc).unwrap_err();
        assert_eq!(err.code(), code, "{doc}");
    }
    assert_eq!(
        parse_creditmap(&[0xff, 0xfe, b'{'], ParseMode::Lenient).unwrap_err().code(),
        "SyntaxError"
    );
}

#[test]
fn numeric_and_string_weights() {
    let doc = format!(r#"{{{HEAD},"author":[{{"name":"A","creditWeight":0.5}},{{"name":"B","creditWeight":" 0.5 "}}]}}"#);
    let map = strict(&doc).unwrap();
    assert_eq!(map.entries.iter().map(|e| e.weight).collect::<Vec<_>>(), [0.5, 0.5]);
}

#[test]
fn unknown_keys_strict_and_lenient() {
    let doc = format!(
        r#"{{{HEAD},"funder":{{"name":"NSF"}},"author":[{{"name":"A","role":"lead","creditWeight":"1"}}],"citation":{{"datasets":[]}}}}"#
    );
    assert!(matches!(strict(&doc), Err(ParseError::UnknownKey { ref path }) if path == "funder"));

    let (map, warnings) = parse_creditmap(doc.as_bytes(), ParseMode::Lenient).unwrap();
    let paths: Vec<&str> = warnings.iter().map(|w| w.path.as_str()).collect();
    assert_eq!(paths, ["funder", "author[0].role", "citation.datasets"]);
    assert!(warnings.iter().all(|w| w.code == WarningCode::UnknownKey));
    assert_eq!(map.product.display.extensions[0].0, "funder");
    assert_eq!(map.entries[0].display.extensions, vec![("role".to_string(), "lead".into())]);

    let out = serialize_creditmap(&map);
    let again = parse_creditmap(&out, ParseMode::Lenient).unwrap().0;
    assert_eq!(again, map);
}

#[test]
fn unknown_type_lenient_keeps_tag() {
    let doc = r#"{"@context":"http://schema.org","@type":"SoftwareApplication","headline":"T","doi":"10.1/t","author":[{"name":"A","creditWeight":"1"}]}"#;
    assert!(matches!(strict(doc), Err(ParseError::UnknownType { .. })));
    let map = lenient(doc).unwrap();
    assert_eq!(map.product.kind, ProductKind::Other);
    assert_eq!(map.product.id.to_string(), "doi:10.1/t");
    let out = String::from_utf8(serialize_creditmap(&map)).unwrap();
    assert!(out.contains("\"@type\": \"SoftwareApplication\""));
    assert_eq!(lenient(&out).unwrap(), map);
}

#[test]
fn identity_precedence() {
    let doc = format!(
        r#"{{{HEAD},"author":[{{"name":"A","email":"a@x.org","url":"https://a.example","doi":"10.1/A","@id":"https://orcid.org/0000-0002-1825-0097","creditWeight":"0.2"}},
            {{"name":"B","email":"b@x.org","url":"https://b.example/","doi":"10.1/B","creditWeight":"0.2"}},
            {{"name":"C","email":"c@x.org","codeRepository":"https://c.example/repo","url":"https://c.example","creditWeight":"0.2"}},
            {{"name":"D","email":"D@x.org","creditWeight":"0.2"}},
            {{"headline":"E  Title","creditWeight":"0.2"}}]}}"#
    );
    let ids: Vec<String> = strict(&doc).unwrap().entries.iter().map(|e| e.entity.to_string()).collect();
    assert_eq!(
        ids,
        [
            "orcid:0000-0002-1825-0097",
            "doi:10.1/b",
            "url:https://c.example/repo",
            "email:d@x.org",
            "name:e title"
        ]
    );
}

#[test]
fn orcid_in_product_category_warns() {
    let doc = format!(
        r#"{{{HEAD},"author":[{{"name":"A","creditWeight":"0.5"}}],"citation":{{"software":[{{"@id":"http://orcid.org/0000-0002-1825-0097","creditWeight":"0.5"}}]}}}}"#
    );
    let (_, warnings) = parse_creditmap(doc.as_bytes(), ParseMode::Strict).unwrap();
    assert_eq!(warnings.len(), 1);
    assert_eq!(warnings[0].code, WarningCode::PersonIdInProductCategory);
}

#[test]
fn document_order_within_categories() {
    // citation keys in a different order than the traversal order
    let doc = format!(
        r#"{{{HEAD},"citation":{{"other":[{{"name":"o","creditWeight":"0.1"}}],"articles":[{{"doi":"10.1/z","creditWeight":"0.2"}},{{"doi":"10.1/a","creditWeight":"0.2"}}]}},"author":[{{"name":"z","creditWeight":"0.25"}},{{"name":"a","creditWeight":"0.25"}}]}}"#
    );
    let ids: Vec<String> = strict(&doc).unwrap().entries.iter().map(|e| e.entity.to_string()).collect();
    assert_eq!(ids, ["name:z", "name:a", "doi:10.1/z", "doi:10.1/a", "name:o"]);
}

fn arb_entity() -> impl Strategy<Value = (EntityId, Descriptor)> {
    let orcid = "[0-9]{15}".prop_map(|base| {
        let check = "0123456789X"
            .chars()
            .find(|c| credit_ledger::model::validate_orcid_checksum(&format!("{base}{c}")))
            .unwrap();
        let text = format!("{}-{}-{}-{}{}", &base[0..4], &base[4..8], &base[8..12], &base[12..15], check);
        (EntityId::parse(&text).unwrap(), Descriptor { type_tag: Some("Person".into()), name: Some("Someone".into()), ..Default::default() })
    });
    let doi = "10\\.[0-9]{4}/[a-zA-Z0-9.]{1,8}".prop_map(|d| {
        (EntityId::parse(&d).unwrap(), Descriptor { doi: Some(d), headline: Some("A paper".into()), ..Default::default() })
    });
    let repo = "[a-z]{1,8}/[a-z]{1,8}".prop_map(|p| {
        let url = format!("https://github.com/{p}");
        (EntityId::parse(&url).unwrap(), Descriptor { code_repository: Some(url), license: Some("MIT".into()), ..Default::default() })
    });
    let email = "[a-z]{1,6}@[a-z]{1,6}\\.org".prop_map(|e| {
        (EntityId::parse(&e).unwrap(), Descriptor { email: Some(e), ..Default::default() })
    });
    let name = "[A-Za-z]{1,6}( [A-Za-z]{1,6}){0,2}".prop_map(|n| {
        (EntityId::from_name(&n).unwrap(), Descriptor { name: Some(n), ..Default::default() })
    });
    // identifier that the descriptor alone does not re-derive
    let bare = "[a-z]{1,8}".prop_map(|n| {
        (EntityId::parse(&format!("name:{n}")).unwrap(), Descriptor { headline: Some("unrelated".into()), ..Default::default() })
    });
    prop_oneof![orcid, doi, repo, email, name, bare]
}

fn arb_creditmap() -> impl Strategy<Value = CreditMap> {
    (
        prop::collection::vec((arb_entity(), 0usize..5, 1u32..1000), 1..8),
        "[A-Za-z ]{1,20}",
        prop::option::of("10\\.[0-9]{4}/[a-z]{1,6}"),
        prop::option::of(prop::collection::vec("[a-z]{1,6}", 0..3)),
        prop_oneof![Just(ProductKind::ScholarlyArticle), Just(ProductKind::Code), Just(ProductKind::Dataset), Just(ProductKind::BlogPosting)],
    )
        .prop_filter_map("needs unique entities", |(raw, headline, doi, keywords, kind)| {
            let total: f64 = raw.iter().map(|(_, _, w)| f64::from(*w)).sum();
            let mut entries: Vec<CreditEntry> = Vec::new();
            for (i, ((entity, display), cat, w)) in raw.into_iter().enumerate() {
                let category = if i == 0 { Category::Author } else { Category::ALL[cat] };
                if entries.iter().any(|e| e.entity == entity) {
                    return None;
                }
                entries.push(CreditEntry { entity, category, weight: f64::from(w) / total, display });
            }
            entries.sort_by_key(|e| Category::ALL.iter().position(|c| *c == e.category));
            let headline = if headline.trim().is_empty() { "untitled".to_string() } else { headline };
            let id = match doi {
                Some(d) => EntityId::parse(&d).unwrap(),
                None => EntityId::from_name(&headline).unwrap(),
            };
            let mut product = ProductMeta::new(id, kind, headline);
            product.keywords = keywords;
            Some(CreditMap::new(product, entries))
        })
}

proptest! {
    #[test]
    fn parse_serialize_round_trip(map in arb_creditmap()) {
        let bytes = serialize_creditmap(&map);
        let (again, warnings) = parse_creditmap(&bytes, ParseMode::Strict).unwrap();
        prop_assert!(warnings.iter().all(|w| w.code == WarningCode::PersonIdInProductCategory));
        prop_assert_eq!(&again, &map);
        prop_assert_eq!(serialize_creditmap(&again), bytes);
    }

    #[test]
    fn parse_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_creditmap(&bytes, ParseMode::Lenient);
        let _ = parse_creditmap(&bytes, ParseMode::Strict);
    }

    #[test]
    fn parse_never_panics_on_near_documents(
        weight in prop_oneof![Just("\"0.5\"".to_string()), "-?[0-9]{1,3}(\\.[0-9]{0,3})?", "\"[a-z0-9.]{0,5}\"", Just("null".to_string())],
        id in "[ -~]{0,30}",
        key in "[a-z@]{1,8}",
    ) {
        let doc = format!(
            r#"{{"@context":"http://schema.org","@type":"Code","headline":"h","author":[{{"@id":{id:?},"{key}":1,"creditWeight":{weight}}}]}}"#
        );
        let _ = parse_creditmap(doc.as_bytes(), ParseMode::Lenient);
        let _ = parse_creditmap(doc.as_bytes(), ParseMode::Strict);
    }
}

#[test]
fn id_scheme_of_blog_post() {
    let map = parse_fixture("golden/creditmap.jsonld");
    assert_eq!(map.entries[5].entity.scheme(), IdScheme::Url);
}

#[test]
fn normalized_golden_document_differs_only_in_whitespace() {
    let golden = read_fixture("golden/creditmap.jsonld");
    let normalized = serialize_creditmap(&parse_fixture("golden/creditmap.jsonld"));
    let squash = |b: &[u8]| -> String {
        // no string value in the document contains a run of two spaces or a newline
        String::from_utf8(b.to_vec()).unwrap().lines().map(str::trim).collect::<Vec<_>>().join("")
    };
    assert_eq!(squash(&normalized), squash(&golden));
}
