use folstab_core::catalog::{classify_unstable, condition_lambda1, product_instability, Catalog, FamilyTag};
use proptest::prelude::*;

proptest! {
    #[test]
    fn classification_is_scale_invariant(c in 0.01..100.0f64) {
        for rec in Catalog::builtin().records {
            let scaled = rec.rescaled(c);
            prop_assert_eq!(classify_unstable(&rec), classify_unstable(&scaled));
            if let Ok(b) = condition_lambda1(&rec) {
                prop_assert_eq!(b, condition_lambda1(&scaled).unwrap(), "{}", rec.name);
            }
        }
    }
}

#[test]
fn listed_records_satisfy_the_eigenvalue_condition() {
    for rec in Catalog::builtin().records {
        let c = classify_unstable(&rec);
        if c.unstable {
            assert!(condition_lambda1(&rec).unwrap(), "{}", rec.name);
        }
        if rec.tag == FamilyTag::Other {
            assert!(!c.unstable, "{}", rec.name);
        }
    }
}

#[test]
fn products_need_every_factor_listed() {
    let cat = Catalog::builtin();
    let s3 = cat.get("S^3").unwrap();
    let s2 = cat.get("S^2").unwrap();
    assert!(product_instability(&[s3, s3]).unwrap());
    assert!(!product_instability(&[s3, s2]).unwrap());
    assert!(product_instability(&[]).is_err());
}

#[test]
fn malformed_catalog_lines_are_rejected() {
    assert!(Catalog::parse("S^4 | d | n=4 | four | 4 | 12 | true | true | round | x\n").is_err());
    assert!(Catalog::parse("S^4 | d | n=4\n").is_err());
}
