//! Stub solvers that answer sat, unknown, garbage, nothing at all, or exit.

use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dcv::inference::{verify_contract, VerifierConfig};

pub const MODES: [&str; 5] = ["sat", "unknown", "garbage", "timeout", "crash"];

/// A solver that misbehaves as `mode` on every `check-sat`, or only on
/// sessions not named `*.base` when `after_base`.
pub fn stub(dir: &Path, mode: &str, after_base: bool) -> PathBuf {
    let answer = match mode {
        "sat" => "echo sat",
        "unknown" => "echo unknown",
        "garbage" => "echo '(banana 42'; echo ')'; echo 'sat unsat'",
        "timeout" => "cat > /dev/null; exit 0",
        "crash" => "exit 7",
        _ => unreachable!(),
    };
    let honest = if after_base {
        r#"case "$name" in *.base*) echo unsat; continue;; esac"#
    } else {
        ":"
    };
    let text = format!(
        r#"#!/bin/sh
name=""
while IFS= read -r line; do
  case "$line" in
    "; "*) [ -z "$name" ] && name="$line";;
    *"(check-sat)"*)
      {honest}
      {answer};;
    *"(get-value"*|*"(get-model)"*) echo '(error "stub")';;
    *"(get-info"*) echo '(:reason-unknown "stub")';;
  esac
done
"#
    );
    let path = dir.join(format!("stub-{mode}-{}", if after_base { "late" } else { "early" }));
    std::fs::write(&path, text).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

/// Verdicts for every stub on the voting contract, with the elapsed time.
pub fn never_verified() -> (bool, Duration, Vec<String>) {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (vc, compiled) = super::compiled("voting.dcn");
    let mut ok = true;
    let mut lines = Vec::new();
    for mode in MODES {
        for late in [false, true] {
            let cfg = VerifierConfig {
                qtimeout: Duration::from_millis(200),
                budget: Duration::from_secs(1),
                ..VerifierConfig::with_solver(stub(dir.path(), mode, late))
            };
            let verdict = match verify_contract(&vc, &compiled, &cfg) {
                Ok(rs) => {
                    ok &= rs.iter().all(|r| !r.verdict.is_verified());
                    rs.iter().map(|r| r.verdict.label()).collect::<Vec<_>>().join(",")
                }
                Err(e) => format!("error: {e}"),
            };
            lines.push(format!("{mode}{}: {verdict}", if late { " after base" } else { "" }));
        }
    }
    (ok, start.elapsed(), lines)
}

