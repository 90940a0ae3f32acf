//! Write the SMT-LIB scripts for plain induction (invariant = property) of
//! a contract into a directory.
//!
//!     cargo run --example dump_smt -- corpus/wallet.dcn /tmp/wallet-smt

use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/wallet.dcn")));
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("dcv-smt"));

    let src = std::fs::read_to_string(&path).expect("readable contract");
    let name = path.file_stem().unwrap().to_string_lossy();
    let vc = dcv::frontend::load(&name, &src).unwrap_or_else(|ds| {
        for d in ds {
            eprintln!("{}", d.render(&path.display().to_string()));
        }
        std::process::exit(2)
    });
    let compiled = dcv::compiler::compile(&vc).expect("compiles");
    for f in dcv::cli::dump_obligations(&compiled, &dir).expect("writable directory") {
        let bytes = std::fs::metadata(&f).map(|m| m.len()).unwrap_or(0);
        println!("{:>7}  {}", bytes, f.display());
    }
}
