//! The full request pipeline in-process: the shipped config, its mock backend,
//! the same prompt at several trust levels, then the audit trail.

use std::path::Path;

use trustgate::gateway::{load_config, AuditQuery, CompletionRequest, Gateway};
use trustgate::trust::{AuthStrength, DevicePosture, NetworkZone};

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut config = load_config(Path::new(env!("CARGO_MANIFEST_DIR")).join("config/default.toml"))
        .expect("shipped config loads");
    config.server.audit_path = dir.path().join("audit.jsonl");
    config.server.state_path = Some(dir.path().join("state.json"));
    let gateway = Gateway::new(config).expect("gateway starts");

    let prompt = "Summarize the intake note for patient 4471.";
    let calls = [
        (
            "bob",
            "research",
            NetworkZone::Vpn,
            DevicePosture::Unmanaged,
            AuthStrength::Password,
        ),
        (
            "amy",
            "treatment",
            NetworkZone::Trusted,
            DevicePosture::Managed,
            AuthStrength::Mfa,
        ),
        (
            "gus",
            "operations",
            NetworkZone::Public,
            DevicePosture::Unknown,
            AuthStrength::Password,
        ),
        (
            "bob",
            "marketing",
            NetworkZone::Vpn,
            DevicePosture::Managed,
            AuthStrength::Mfa,
        ),
        (
            "bob",
            "research",
            NetworkZone::Vpn,
            DevicePosture::Unmanaged,
            AuthStrength::Anonymous,
        ),
    ];
    for (who, purpose, net, dev, auth) in calls {
        let req = CompletionRequest::new(purpose, prompt, net, dev, auth);
        match gateway.complete(who, req).await {
            Ok(r) => println!(
                "{who:<4} {purpose:<10} tier {} {:<10} level {:<12} {}",
                r.tier,
                r.action.as_str(),
                r.level.as_str(),
                r.text
            ),
            Err(e) => println!("{who:<4} {purpose:<10} HTTP {} {e}", e.status()),
        }
    }

    println!("\naudit:");
    for r in gateway
        .audit()
        .query(&AuditQuery::default())
        .expect("audit readable")
    {
        println!("{}", serde_json::to_string(&r).expect("record serializes"));
    }
    let b = gateway.behavior_state("bob");
    println!(
        "\nbob's posterior: alpha={} beta={} B={:.3}",
        b.alpha,
        b.beta,
        b.score()
    );
}
