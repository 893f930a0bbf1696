//! Runs the shipped recognizers over text and prints spans and the document level.

use trustgate::sensitivity::SensitivityEngine;

fn main() {
    let engine = SensitivityEngine::with_defaults();
    let texts = [
        "The clinic opens at nine.",
        "Reach Dr. Alice Moreno at alice.moreno@example.org or 555-201-7788.",
        "SSN 123-45-6789, record MRN-0048213.",
        "Card 4111 1111 1111 1111 is valid; 4111 1111 1111 1112 fails the checksum.",
        "Refund of $1,240.50 to IBAN DE89370400440532013000.",
    ];
    for text in texts {
        let report = engine.analyze(text);
        println!("{text}\n  level: {}", report.level);
        for s in &report.spans {
            println!(
                "  [{:>2}, {:>2}) {:<12} {:.2} {:?}",
                s.start,
                s.end,
                s.entity_type,
                s.confidence,
                s.text(text)
            );
        }
    }
}
