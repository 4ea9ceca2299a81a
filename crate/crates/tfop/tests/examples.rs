//! Every example runs to completion and prints what it promises.

use std::process::Command;

fn run_example(name: &str) -> String {
    let o = Command::new(env!("CARGO"))
        .args(["run", "--quiet", "--example", name])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn examples_run() {
    for (name, marker) in [
        ("stft_moyal", "reconstruction error"),
        ("modulation_norms", "equals the M² norm"),
        ("quantization", "round-trip symbol error"),
        ("fio", "zero phase degenerate: true"),
        ("reformulation", "N = 16"),
        ("schatten", "log-convexity slack"),
        ("bound_report", "\"ratio\""),
    ] {
        let out = run_example(name);
        assert!(out.contains(marker), "{name} printed:\n{out}");
    }
}
