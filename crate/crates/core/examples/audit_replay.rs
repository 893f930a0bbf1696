//! Generates traffic through the gateway, then summarizes the audit log.

use std::path::Path;

use trustgate::admin::cmd_replay;
use trustgate::gateway::{load_config, CompletionRequest, Gateway};
use trustgate::trust::{AuthStrength, DevicePosture, NetworkZone};

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut config = load_config(Path::new(env!("CARGO_MANIFEST_DIR")).join("config/default.toml"))
        .expect("shipped config loads");
    config.server.audit_path = dir.path().join("audit.jsonl");
    config.server.state_path = None;
    let gateway = Gateway::new(config).expect("gateway starts");

    let prompts = [
        "What are the clinic hours?",
        "Summarize the intake note for patient 4471.",
        "Show the card on file for account 88.",
        "Who handles claim disputes?",
    ];
    for (i, prompt) in prompts.iter().cycle().take(24).enumerate() {
        let (who, purpose) = [
            ("amy", "treatment"),
            ("bob", "research"),
            ("gus", "operations"),
            ("bob", "marketing"),
        ][i % 4];
        let req = CompletionRequest::new(
            purpose,
            *prompt,
            NetworkZone::Vpn,
            DevicePosture::Managed,
            AuthStrength::Mfa,
        );
        let _ = gateway.complete(who, req).await;
    }
    // A torn line, as left by a crash mid-write on a filesystem without atomic appends.
    std::fs::OpenOptions::new()
        .append(true)
        .open(gateway.audit().path())
        .and_then(|mut f| std::io::Write::write_all(&mut f, b"{\"request_id\": \"tru"))
        .expect("append");

    let summary = cmd_replay(gateway.audit().path()).expect("audit readable");
    print!("{}", summary.to_table());
}
