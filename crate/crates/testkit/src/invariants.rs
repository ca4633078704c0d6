//! Property bodies for the cross-module invariants, shared by the unit
//! suites and the acceptance runner.

use beacon_core::corpus::{parse_url, DomainMode, ParsedUrl};
use beacon_core::features::featurize_corpus;
use beacon_core::features::FeatureConfig;
use beacon_core::filter_engine::{CaseMode, FilterSet};
use beacon_core::html_extract::extract;
use beacon_core::image_inspect::{raster_dimensions, sniff_mime, svg_dimensions, MimeType};
use beacon_core::report::SampleSummary;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use crate::corpus_gen::{build_corpus, ImgSpec};

pub fn label() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9-]{0,8}[a-z0-9]"
}

pub fn host() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => proptest::collection::vec(label(), 1..5).prop_map(|l| l.join(".")),
        1 => (any::<u8>(), any::<u8>(), any::<u8>(), any::<u8>())
            .prop_map(|(a, b, c, d)| format!("{a}.{b}.{c}.{d}")),
        1 => Just("[::1]".to_string()),
    ]
}

pub fn url_string() -> impl Strategy<Value = String> {
    (
        prop_oneof![Just("http"), Just("https"), Just("HTTP")],
        host(),
        proptest::option::of(1u16..65535),
        "(/[a-zA-Z0-9._~%-]{0,6}){0,4}",
        proptest::option::of("[a-zA-Z0-9=&%._~-]{0,16}"),
        proptest::option::of("[a-z]{0,4}"),
    )
        .prop_map(|(s, h, p, path, q, frag)| {
            let mut u = format!("{s}://{h}");
            if let Some(p) = p {
                u.push_str(&format!(":{p}"));
            }
            u.push_str(&path);
            if let Some(q) = q {
                u.push('?');
                u.push_str(&q);
            }
            if let Some(f) = frag {
                u.push('#');
                u.push_str(&f);
            }
            u
        })
}

pub fn url_round_trip(raw: &str) -> Result<(), TestCaseError> {
    let a = parse_url(raw, None).unwrap();
    let b = parse_url(&a.to_string(), None).unwrap();
    prop_assert_eq!(&a, &b);
    prop_assert_eq!(a.to_string(), b.to_string());
    let json = serde_json::to_string(&a).unwrap();
    let c: ParsedUrl = serde_json::from_str(&json).unwrap();
    prop_assert_eq!(a, c);
    Ok(())
}

/// qdom implies qurl, exactly one MIME dummy, `mage >= -1`, at most one
/// DTOP dummy, label count equal to the invisible cross-domain images, and
/// a reproducible CSV.
pub fn feature_vector_invariants(specs: &[ImgSpec], failed: u8) -> Result<(), TestCaseError> {
    let mode = DomainMode::Naive;
    let corpus = build_corpus(specs, failed, &mode);
    let filters = FilterSet::parse("||t.net^\n/img/1*.gif\n@@||t.net/img/3", CaseMode::default());
    let cfg = FeatureConfig::default();
    let m = featurize_corpus(&corpus, &filters, &cfg).unwrap();
    prop_assert_eq!(m.vectors.len(), corpus.images.len());
    let mut mime_tally = [0usize; 5];
    for v in &m.vectors {
        prop_assert!(!v.qdom || v.qurl);
        prop_assert_eq!(v.mime_dummies.iter().filter(|&&d| d).count(), 1);
        prop_assert!(v.mage >= -1);
        prop_assert!(v.dtop_dummies.iter().filter(|&&d| d).count() <= 1);
        for (t, d) in mime_tally.iter_mut().zip(v.mime_dummies) {
            *t += d as usize;
        }
    }
    // Every generated image is a GIF.
    prop_assert_eq!(mime_tally[0], corpus.images.len());
    let labels = m.vectors.iter().filter(|v| v.label).count();
    let beacons = corpus.images.iter().filter(|i| i.is_invisible && i.is_cross_domain).count();
    prop_assert_eq!(labels, beacons);
    let again = featurize_corpus(&corpus, &filters, &cfg).unwrap();
    prop_assert_eq!(m.to_csv(), again.to_csv());
    Ok(())
}

pub fn summary_inequalities(specs: &[ImgSpec], failed: u8, psl: bool) -> Result<(), TestCaseError> {
    let mode = if psl { DomainMode::psl() } else { DomainMode::Naive };
    let corpus = build_corpus(specs, failed, &mode);
    let s = SampleSummary::compute(&corpus, &mode);
    prop_assert!(s.one_by_one_cross_domain <= s.one_by_one_images);
    prop_assert!(s.one_by_one_images <= s.images_total);
    prop_assert!(s.cross_domain_images <= s.images_total);
    prop_assert!(s.domains_sampled_ok <= s.domains_listed);
    prop_assert_eq!(s.mime.iter().map(|r| r.images).sum::<usize>(), s.images_total);
    prop_assert_eq!(s.categories.iter().map(|r| r.images).sum::<usize>(), s.images_total);
    prop_assert!(s.top_referencing.len() <= 15 && s.top_referenced.len() <= 15);
    prop_assert!(s.top_referenced.iter().map(|r| r.count).sum::<usize>() <= s.one_by_one_cross_domain);
    let text = s.to_text();
    prop_assert!(!text.contains("NaN") && !text.contains("inf"));
    Ok(())
}

/// Markup fragments that stress the tokenizer when concatenated.
pub fn tag_soup() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            Just("<"), Just(">"), Just("<img"), Just(" src="), Just("\""), Just("'"),
            Just("<!--"), Just("-->"), Just("<script>"), Just("</script"), Just("&amp;"),
            Just("&#"), Just("é"), Just("="), Just("/"), Just(" "), Just("a"), Just("<a href")
        ],
        0..60,
    )
    .prop_map(|p| p.concat())
}

/// Extraction never panics, and every reported `src` is non-panicking to resolve.
pub fn html_extract_total(bytes: &[u8]) -> Result<(), TestCaseError> {
    let r = extract(bytes, None);
    let base = parse_url("http://a.test/x/", None).unwrap();
    for img in &r.img_refs {
        let _ = parse_url(&img.src, Some(&base));
    }
    Ok(())
}

/// Sniffing and every header reader return instead of panicking.
pub fn image_inspect_total(bytes: &[u8]) -> Result<(), TestCaseError> {
    let mime = sniff_mime(bytes, None);
    for m in [MimeType::Gif, MimeType::Png, MimeType::Jpeg, MimeType::Webp, mime] {
        let _ = raster_dimensions(bytes, &m);
    }
    let _ = svg_dimensions(&String::from_utf8_lossy(bytes));
    Ok(())
}

/// Random bytes behind a real magic number, so parsing gets past sniffing.
pub fn prefixed_image_bytes() -> impl Strategy<Value = Vec<u8>> {
    (0usize..5, proptest::collection::vec(any::<u8>(), 0..64)).prop_map(|(i, tail)| {
        let heads: [&[u8]; 5] = [b"GIF89a", b"\x89PNG\r\n\x1a\n", &[0xFF, 0xD8, 0xFF], b"RIFF\0\0\0\0WEBP", b"<svg "];
        let mut b = heads[i].to_vec();
        b.extend(tail);
        b
    })
}
