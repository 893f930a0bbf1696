//! Scans a small generated tree and prints the table and JSON reports.

use trustgate::admin::{cmd_scan, synthetic_corpus};
use trustgate::sensitivity::{SensitivityEngine, SensitivityLevel};

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    for (i, doc) in synthetic_corpus(1, 6).iter().enumerate() {
        std::fs::write(dir.path().join(format!("note_{i}.txt")), doc).expect("write");
    }
    std::fs::write(dir.path().join("readme.txt"), "Nothing sensitive here.").expect("write");
    std::fs::write(
        dir.path().join("blob.bin"),
        b"\x7fELF\x00\x00 4111111111111111",
    )
    .expect("write");

    let engine = SensitivityEngine::with_defaults();
    let report = cmd_scan(
        &[dir.path().to_path_buf()],
        &engine,
        SensitivityLevel::Confidential,
    );
    print!("{}", report.to_table());
    println!("exit code {}", report.exit_code);
    println!("{}", report.to_json());
}
