use std::collections::BTreeMap;

use super::{RecognizerSpec, SensitivityLevel, Validator};

fn spec(
    id: &str,
    entity_type: &str,
    pattern: &str,
    base_confidence: f64,
    validator: Validator,
    context_words: &[&str],
    numeric: bool,
) -> RecognizerSpec {
    RecognizerSpec {
        id: id.to_string(),
        entity_type: entity_type.to_string(),
        pattern: pattern.to_string(),
        base_confidence,
        validator,
        context_words: context_words.iter().map(|w| w.to_string()).collect(),
        numeric,
    }
}

/// Recognizers for the eight shipped entity types.
///
/// None of these patterns match the `<REDACTED:TYPE>` placeholder form.
pub fn default_recognizers() -> Vec<RecognizerSpec> {
    vec![
        spec(
            "us_ssn",
            "US_SSN",
            r"\b\d{3}-\d{2}-\d{4}\b",
            0.6,
            Validator::None,
            &["ssn", "social security"],
            false,
        ),
        spec(
            "credit_card",
            "CREDIT_CARD",
            r"\b(?:\d[ -]?){11,18}\d\b",
            0.7,
            Validator::Luhn,
            &["card", "visa", "mastercard", "amex", "credit"],
            false,
        ),
        spec(
            "email",
            "EMAIL",
            r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b",
            0.9,
            Validator::None,
            &["email", "e-mail", "contact"],
            false,
        ),
        spec(
            "phone",
            "PHONE",
            r"(?:\+1[ .-]?)?(?:\(\d{3}\)|\b\d{3})[ .-]\d{3}[ .-]\d{4}\b",
            0.6,
            Validator::None,
            &["phone", "tel", "call", "mobile", "fax"],
            false,
        ),
        spec(
            "iban",
            "IBAN",
            r"\b[A-Z]{2}\d{2}(?: ?[A-Z0-9]{4}){2,7}(?: ?[A-Z0-9]{1,4})?\b",
            0.7,
            Validator::None,
            &["iban", "account", "bank"],
            false,
        ),
        spec(
            "person_name",
            "PERSON_NAME",
            r"\b(?:Mr|Mrs|Ms|Dr|Prof)\.? [A-Z][a-z]+(?: [A-Z][a-z]+)?",
            0.6,
            Validator::None,
            &["patient", "name", "client"],
            false,
        ),
        spec(
            "medical_id",
            "MEDICAL_ID",
            r"\b(?:MRN|MID)[-: #]?\d{6,10}\b",
            0.8,
            Validator::None,
            &["medical", "patient", "record", "chart"],
            false,
        ),
        spec(
            "amount",
            "AMOUNT",
            r"\$(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d{2})?",
            0.6,
            Validator::None,
            &["balance", "amount", "salary", "paid", "total"],
            true,
        ),
    ]
}

pub fn default_type_levels() -> BTreeMap<String, SensitivityLevel> {
    use SensitivityLevel::*;
    [
        ("CREDIT_CARD", Secret),
        ("US_SSN", Confidential),
        ("IBAN", Confidential),
        ("MEDICAL_ID", Confidential),
        ("EMAIL", Internal),
        ("PHONE", Internal),
        ("PERSON_NAME", Internal),
        ("AMOUNT", Internal),
    ]
    .into_iter()
    .map(|(t, l)| (t.to_string(), l))
    .collect()
}
