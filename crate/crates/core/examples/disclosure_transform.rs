//! One document through every trust tier under the default disclosure matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trustgate::disclosure::{transform, Action, DisclosureMatrix};
use trustgate::sensitivity::SensitivityEngine;
use trustgate::trust::Tier;

fn main() {
    let engine = SensitivityEngine::with_defaults();
    let matrix = DisclosureMatrix::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let docs = [
        "Visit went well. Patient SSN 123-45-6789 confirmed. Next visit in May.",
        "Contact jane.doe@example.org for the claim. Office hours are nine to five.",
        "Card 4111111111111111 was charged. Receipt sent.",
    ];
    for doc in docs {
        let report = engine.analyze(doc);
        println!("{doc}  [{}]", report.level);
        for tier in Tier::ALL {
            let out = transform(doc, &report, tier, &matrix, &mut rng);
            println!("  tier {tier} {:<10} {}", out.action.as_str(), out.text);
        }
    }

    // A matrix that adds calibrated noise to amounts instead of summarizing.
    use Action::*;
    let noisy = DisclosureMatrix::from_rows([
        [Pass, Pass, Pass, Pass],
        [Noise, Pass, Pass, Pass],
        [Deny, Noise, Pass, Pass],
        [Deny, Deny, Redact, Pass],
    ])
    .expect("monotone");
    let doc = "Outstanding balance is $1,240.50 as of today.";
    let report = engine.analyze(doc);
    for _ in 0..3 {
        let out = transform(doc, &report, Tier::ZERO, &noisy, &mut rng);
        println!("noise eps={:?}: {}", out.epsilon_spent, out.text);
    }

    let mut broken = *noisy.rows();
    broken[3][3] = Deny;
    println!(
        "broken matrix: {}",
        DisclosureMatrix::from_rows(broken).unwrap_err()
    );
}
