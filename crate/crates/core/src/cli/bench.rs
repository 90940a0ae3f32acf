//! Verify a directory of contracts; one row per file, sorted by name.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::report::{BenchReport, BenchRow, Report, BENCH_SCHEMA};
use super::{verify_file, Flags, Format, EXIT_INPUT, EXIT_UNKNOWN, EXIT_VERIFIED};

/// `.dcn` files directly inside `dir`, sorted.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "dcn"))
        .collect();
    files.sort();
    Ok(files)
}

fn row(path: &Path, flags: &Flags) -> (BenchRow, Option<Report>) {
    let start = Instant::now();
    let benchmark = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let file = path.display().to_string();
    match verify_file(path, flags) {
        Ok(r) => (
            BenchRow {
                benchmark,
                file,
                rules: Some(r.rules),
                verdict: r.verdict.clone(),
                seconds: r.wall_time,
                error: None,
            },
            Some(r),
        ),
        Err((code, msg)) => (
            BenchRow {
                benchmark,
                file,
                rules: None,
                verdict: if code == EXIT_INPUT { "input-error" } else { "solver-error" }.into(),
                seconds: start.elapsed().as_secs_f64(),
                error: Some(msg),
            },
            None,
        ),
    }
}

pub fn run_bench(dir: &Path, flags: &Flags) -> std::io::Result<BenchReport> {
    let files = corpus_files(dir)?;
    // each contract reports its own diagnostics in the row
    let flags = Flags {
        format: Format::Text,
        ..flags.clone()
    };
    let results: Vec<(BenchRow, Option<Report>)> = files.par_iter().map(|p| row(p, &flags)).collect();
    let (rows, reports): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(BenchReport {
        schema: BENCH_SCHEMA.into(),
        budget: flags.budget,
        rows,
        reports: reports.into_iter().flatten().collect(),
    })
}

pub fn cmd_bench(dir: &Path, flags: &Flags, json: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match run_bench(dir, flags) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "{}: error: {e}", dir.display());
            return EXIT_INPUT;
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("bench report serializes") + "\n";
    let json_path = json.map(Path::to_path_buf).unwrap_or_else(|| dir.join("dcv-bench.json"));
    if let Err(e) = std::fs::write(&json_path, &text) {
        let _ = writeln!(err, "{}: error: {e}", json_path.display());
    }
    let shown = match flags.format {
        Format::Json => text,
        Format::Text => report.to_text(),
    };
    let _ = out.write_all(shown.as_bytes());
    for r in &report.rows {
        if let Some(e) = &r.error {
            let _ = writeln!(err, "{e}");
        }
    }
    if report.all_verified() {
        EXIT_VERIFIED
    } else {
        EXIT_UNKNOWN
    }
}
