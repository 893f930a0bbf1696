mod common;

use common::*;
use proptest::prelude::*;
use trustgate::policy::{evaluate, parse_policy, Effect, Policy};
use trustgate::trust::{AuthStrength, DevicePosture, NetworkZone, Principal, RequestContext};

fn decide(policy: &Policy, env: [bool; 3]) -> (Effect, Vec<String>) {
    let d = evaluate(
        policy,
        &principal_for(env),
        &plain_ctx(),
        "records/1",
        "read",
    );
    (d.effect, d.matched_rule_ids)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_truth_table_oracle(seed in any::<u64>(), minimal in any::<bool>()) {
        let rules = random_rules(seed);
        let src = rules_source(&rules, minimal);
        let policy = parse_policy(&src).unwrap();
        for env in all_assignments() {
            prop_assert_eq!(decide(&policy, env), oracle_decide(&rules, env), "{}\n{:?}", src, env);
        }
    }

    #[test]
    fn display_round_trips(seed in any::<u64>(), minimal in any::<bool>()) {
        let policy = parse_policy(&rules_source(&random_rules(seed), minimal)).unwrap();
        let printed = policy.to_string();
        let reparsed = parse_policy(&printed).unwrap();
        prop_assert_eq!(&reparsed, &policy, "{}", printed);
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn a_matching_deny_always_wins(seed in any::<u64>(), cond_seed in any::<u64>()) {
        let mut rules = random_rules(seed);
        let extra = OracleRule {
            id: "veto".into(),
            effect: Effect::Deny,
            condition: Some(random_expr(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cond_seed), 2)),
            priority: -1,
        };
        rules.push(extra.clone());
        let policy = parse_policy(&rules_source(&rules, true)).unwrap();
        for env in all_assignments() {
            let (effect, ids) = decide(&policy, env);
            if extra.condition.as_ref().unwrap().eval(env) {
                prop_assert_eq!(effect, Effect::Deny);
                prop_assert!(ids.contains(&"veto".to_string()));
            }
            if effect == Effect::Permit {
                let no_deny_holds = rules
                    .iter()
                    .filter(|r| r.effect == Effect::Deny)
                    .all(|r| r.condition.as_ref().is_some_and(|c| !c.eval(env)));
                prop_assert!(no_deny_holds);
            }
        }
    }

    #[test]
    fn evaluation_is_total(
        names in proptest::collection::vec("[a-z]{1,6}(\\.[a-z]{1,6})?", 1..4),
        values in proptest::collection::vec("[a-z0-9]{0,4}", 1..4),
        hour in 0u32..24,
    ) {
        // Arbitrary (mostly unresolvable) attribute names never panic and
        // every comparison on them is false.
        let mut src = String::new();
        for (i, n) in names.iter().enumerate() {
            let v = &values[i % values.len()];
            src.push_str(&format!("permit p{i} on \"**\" when {n} == \"{v}\" or {n} in [\"{v}\", \"x\"] or {n} >= {hour}\n"));
        }
        let Ok(policy) = parse_policy(&src) else { return Ok(()); };
        let principal = Principal::new("p");
        let ctx = RequestContext::new("ops", NetworkZone::Vpn, DevicePosture::Unknown, AuthStrength::Password);
        let d = evaluate(&policy, &principal, &ctx, "any/thing", "act");
        let builtin = |n: &String| trustgate::policy::BUILTIN_ATTRIBUTES.contains(&n.as_str());
        if !names.iter().any(builtin) {
            prop_assert_eq!(d.effect, Effect::Deny);
            prop_assert!(d.matched_rule_ids.is_empty());
        }
    }
}

#[test]
fn unresolved_comparison_is_false_not_an_error() {
    let p = parse_policy(
        r#"permit a on "**" when ghost == "x"; permit b on "**" when not ghost == "x""#,
    )
    .unwrap();
    let d = evaluate(&p, &Principal::new("p"), &plain_ctx(), "r", "read");
    assert_eq!(d.effect, Effect::Permit);
    assert_eq!(d.matched_rule_ids, vec!["b".to_string()]);
    assert_eq!(d.unresolved, vec!["ghost".to_string()]);
}

#[test]
fn precedence_not_and_or() {
    // not a or b and c  ==  (not a) or (b and c)
    let p = parse_policy(r#"permit r on "**" when not a or b and c"#).unwrap();
    for env in all_assignments() {
        let expected = !env[0] || (env[1] && env[2]);
        assert_eq!(decide(&p, env).0 == Effect::Permit, expected, "{env:?}");
    }
}
