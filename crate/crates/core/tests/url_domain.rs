use beacon_core::corpus::{is_cross_domain, parse_url, second_level_domain, DomainMode, SuffixTable};
use beacon_testkit::invariants::{host, label, url_round_trip, url_string};
use proptest::prelude::*;

proptest! {
    #[test]
    fn serialize_reparse_round_trip(raw in url_string()) {
        url_round_trip(&raw)?;
    }

    #[test]
    fn host_is_lowercase_and_nonempty(raw in url_string()) {
        let u = parse_url(&raw, None).unwrap();
        prop_assert!(!u.host().is_empty());
        prop_assert_eq!(u.host().to_ascii_lowercase(), u.host());
        prop_assert!(!u.host().contains(char::is_whitespace));
    }

    #[test]
    fn naive_sld_has_at_most_two_labels(h in host()) {
        let sld = second_level_domain(&h, &DomainMode::Naive);
        if !h.contains(':') && !h.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
            prop_assert!(sld.split('.').count() <= 2);
        }
        prop_assert!(h.ends_with(&sld));
    }

    #[test]
    fn psl_sld_is_suffix_plus_one_label(labels in proptest::collection::vec(label(), 1..4),
                                         suffix in prop_oneof![Just("com"), Just("co.uk"), Just("github.io"), Just("zz")]) {
        let table = SuffixTable::bundled();
        let h = format!("{}.{}", labels.join("."), suffix);
        let sld = second_level_domain(&h, &DomainMode::psl());
        let ps = table.public_suffix(&h);
        prop_assert_eq!(sld.split('.').count(), ps.split('.').count() + 1);
        prop_assert!(sld.ends_with(&ps));
    }

    #[test]
    fn same_host_is_never_cross_domain(raw in url_string()) {
        let u = parse_url(&raw, None).unwrap();
        prop_assert!(!is_cross_domain(&u, &u, &DomainMode::Naive));
        prop_assert!(!is_cross_domain(&u, &u, &DomainMode::psl()));
    }
}

#[test]
fn spec_url_examples() {
    let u = parse_url("HTTP://User:pw@Tracker.Example.COM/p.gif?id=1#frag", None).unwrap();
    assert_eq!(u.scheme(), "http");
    assert_eq!(u.host(), "tracker.example.com");
    assert_eq!(u.port(), 80);
    assert_eq!(u.query(), Some("id=1"));
    let base = parse_url("https://a.com/dir/page.html", None).unwrap();
    let r = parse_url("../img/x.png", Some(&base)).unwrap();
    assert_eq!(r.to_string(), "https://a.com/img/x.png");
    assert!(parse_url("", None).is_err());
    assert!(parse_url("http://", None).is_err());
}
