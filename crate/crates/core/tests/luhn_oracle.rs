mod common;

use common::luhn_oracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trustgate::sensitivity::{luhn_valid, SensitivityEngine};

#[test]
fn agrees_with_oracle_on_random_digit_strings() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1u64);
    let mut valid = 0;
    for _ in 0..10_000 {
        let len = rng.random_range(10..=21);
        let s: String = (0..len)
            .map(|_| char::from(b'0' + rng.random_range(0..10u8)))
            .collect();
        let expected = luhn_oracle(&s);
        assert_eq!(luhn_valid(&s), expected, "{s}");
        valid += expected as usize;
    }
    // Roughly a tenth of in-range strings pass the checksum.
    assert!((600..=1100).contains(&valid), "{valid}");
}

#[test]
fn known_numbers() {
    assert!(luhn_valid("4111111111111111"));
    assert!(!luhn_valid("4111111111111112"));
    assert!(luhn_valid("4111 1111 1111 1111"));
    assert!(luhn_valid("4111-1111-1111-1111"));
    assert!(!luhn_valid("4111x1111111111111"));
}

#[test]
fn detector_applies_the_checksum() {
    let engine = SensitivityEngine::with_defaults();
    let hit = engine.detect("card 4111111111111111 on file");
    assert!(
        hit.iter().any(|s| s.entity_type == "CREDIT_CARD"),
        "{hit:?}"
    );
    let miss = engine.detect("card 4111111111111112 on file");
    assert!(
        miss.iter().all(|s| s.entity_type != "CREDIT_CARD"),
        "{miss:?}"
    );
}

proptest! {
    #[test]
    fn agrees_with_oracle_on_separated_strings(s in "[0-9 -]{0,24}") {
        prop_assert_eq!(luhn_valid(&s), luhn_oracle(&s));
    }

    #[test]
    fn any_string(s in "\\PC{0,24}") {
        prop_assert_eq!(luhn_valid(&s), luhn_oracle(&s));
    }
}
