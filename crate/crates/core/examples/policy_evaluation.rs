//! Parses a policy, lints it and evaluates a few requests under deny-overrides.

use trustgate::policy::{evaluate, parse_policy, validate_policy, AttributeSchema};
use trustgate::trust::{AuthStrength, DevicePosture, NetworkZone, Principal, RequestContext};

const POLICY: &str = r#"
declare department

permit care on "records/*":read when role == "clinician" and department == "cardiology"
permit audit on "records/**":read when role == "auditor" cap internal
deny offsite on "records/**" when context.network_zone == "public"
deny night on "records/**":export when context.hour >= 22 or context.hour <= 5
"#;

fn main() {
    let policy = parse_policy(POLICY).expect("policy parses");
    println!("{policy}");
    for d in validate_policy(&policy, &AttributeSchema::default()) {
        println!("lint: {d}");
    }

    let amy = Principal::new("amy")
        .with_role("clinician")
        .with_attribute("department", "cardiology");
    let ray = Principal::new("ray").with_role("auditor");
    let onsite = RequestContext::new(
        "treatment",
        NetworkZone::Trusted,
        DevicePosture::Managed,
        AuthStrength::Mfa,
    );
    let cafe = RequestContext::new(
        "treatment",
        NetworkZone::Public,
        DevicePosture::Managed,
        AuthStrength::Mfa,
    );

    let requests = [
        (&amy, &onsite, "records/17", "read"),
        (&amy, &cafe, "records/17", "read"),
        (&amy, &onsite, "records/17/notes", "read"),
        (&ray, &onsite, "records/17/notes", "read"),
        (&ray, &onsite, "billing/3", "read"),
    ];
    for (p, ctx, resource, action) in requests {
        let d = evaluate(&policy, p, ctx, resource, action);
        println!(
            "{:<4} {:<8} {:<18} {:<5} -> {:?} {:?} {:?}",
            p.id,
            ctx.network_zone.as_str(),
            resource,
            action,
            d.effect,
            d.matched_rule_ids,
            d.obligations
        );
    }
}
