//! Beta-Bernoulli compliance updates and HMM anomaly scoring of action histories.

use trustgate::behavior::{
    flag_anomaly, update_posterior, ActionKind, BehaviorEvent, BehaviorState, HmmModel,
    DEFAULT_ANOMALY_THRESHOLD, DEFAULT_VIOLATION_WEIGHT,
};

fn main() {
    let mut state = BehaviorState::default();
    println!("prior                 B = {:.4}", state.score());
    let events = [
        (ActionKind::Violation, false),
        (ActionKind::Query, true),
        (ActionKind::Query, true),
        (ActionKind::SensitiveAccess, true),
    ];
    for (action, compliant) in events {
        state = update_posterior(
            &state,
            &BehaviorEvent::new("bob", action, compliant),
            DEFAULT_VIOLATION_WEIGHT,
        );
        println!(
            "{:<16} {:<5} B = {:.4}",
            action.as_str(),
            compliant,
            state.score()
        );
    }

    let model = HmmModel::default();
    use ActionKind::*;
    let histories: [(&str, Vec<ActionKind>); 3] = [
        ("routine", vec![Query; 12]),
        (
            "mixed",
            vec![Query, SensitiveAccess, Query, Query, SensitiveAccess, Query],
        ),
        (
            "exfiltration",
            vec![
                Query, LoginFail, Export, Violation, LoginFail, Export, Violation,
            ],
        ),
    ];
    for (name, seq) in histories {
        let v = flag_anomaly(&model, &seq, DEFAULT_ANOMALY_THRESHOLD).expect("known symbols");
        println!(
            "{name:<13} mean log-lik {:>7.3} anomalous={}",
            v.mean_loglik, v.anomalous
        );
    }
}
