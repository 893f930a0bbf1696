//! Seeded synthetic sessions across tier mixes, checking reproducibility and leakage.

use std::path::Path;

use trustgate::admin::{cmd_simulate, SimulationSpec};
use trustgate::gateway::load_config;

fn main() {
    let config = load_config(Path::new(env!("CARGO_MANIFEST_DIR")).join("config/default.toml"))
        .expect("shipped config loads");
    for mix in [[0.25; 4], [0.7, 0.3, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]] {
        let spec = SimulationSpec {
            sessions: 12,
            requests_per_session: 8,
            seed: 2024,
            tier_mix: mix,
            ..SimulationSpec::default()
        };
        let a = cmd_simulate(&spec, &config).expect("simulation runs");
        let b = cmd_simulate(&spec, &config).expect("simulation runs");
        println!("mix {mix:?} (reproducible: {})", a == b);
        print!("{}", a.to_table());
        println!();
    }
}
