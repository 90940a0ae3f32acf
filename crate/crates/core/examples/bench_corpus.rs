//! Run the benchmark table over the shipped corpus with a short budget.
//!
//!     cargo run --release --example bench_corpus -- 120

fn main() {
    let budget = std::env::args().nth(1).unwrap_or_else(|| "60".into());
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    let out = std::env::temp_dir().join("dcv-bench-example.json");
    let code = dcv::cli::run_with(
        ["dcv", "bench", corpus, "--budget", &budget, "--out", out.to_str().unwrap()],
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    println!("json report: {}", out.display());
    std::process::exit(code);
}
