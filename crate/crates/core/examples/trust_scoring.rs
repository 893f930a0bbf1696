//! Scores one principal across request contexts and shows the tier each lands in.

use std::collections::BTreeMap;

use trustgate::trust::{
    AuthStrength, ContextFactors, DevicePosture, NetworkZone, Principal, RequestContext,
    TrustModel, TrustWeights,
};

fn main() {
    let model = TrustModel {
        weights: TrustWeights::default(),
        role_weights: BTreeMap::from([("analyst".into(), 0.5), ("clinician".into(), 0.9)]),
        purpose_scores: BTreeMap::from([("treatment".into(), 1.0), ("research".into(), 0.6)]),
        default_purpose_score: 0.5,
        factors: ContextFactors::default(),
    };
    let alice = Principal::new("alice").with_role("clinician");
    let bob = Principal::new("bob").with_role("analyst");

    let cases = [
        (
            &alice,
            "treatment",
            NetworkZone::Trusted,
            DevicePosture::Managed,
            AuthStrength::Mfa,
            0.5,
        ),
        (
            &alice,
            "treatment",
            NetworkZone::Public,
            DevicePosture::Unknown,
            AuthStrength::Password,
            0.5,
        ),
        (
            &bob,
            "research",
            NetworkZone::Vpn,
            DevicePosture::Unmanaged,
            AuthStrength::Password,
            0.5,
        ),
        (
            &bob,
            "marketing",
            NetworkZone::Public,
            DevicePosture::Unknown,
            AuthStrength::Anonymous,
            0.2,
        ),
    ];
    println!(
        "{:<6} {:<10} {:<8} {:<10} {:<10} {:>5} {:>6} tier",
        "who", "purpose", "network", "device", "auth", "B", "raw"
    );
    for (p, purpose, net, dev, auth, behavior) in cases {
        let ctx = RequestContext::new(purpose, net, dev, auth);
        let score = model.score(p, &ctx, behavior).expect("valid inputs");
        println!(
            "{:<6} {:<10} {:<8} {:<10} {:<10} {:>5.2} {:>6.3} {}",
            p.id,
            purpose,
            net.as_str(),
            dev.as_str(),
            auth.as_str(),
            behavior,
            score.raw,
            score.tier
        );
    }
}
