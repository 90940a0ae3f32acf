//! Print the transition system compiled from a `.dcn` file.
//!
//!     cargo run --example compile_dump -- corpus/voting.dcn

use std::path::PathBuf;

fn main() {
    let path: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/voting.dcn")));
    let src = std::fs::read_to_string(&path).expect("readable contract");
    let name = path.file_stem().unwrap().to_string_lossy();
    let vc = match dcv::frontend::load(&name, &src) {
        Ok(vc) => vc,
        Err(diags) => {
            for d in diags {
                eprintln!("{}", d.render(&path.display().to_string()));
            }
            std::process::exit(2);
        }
    };
    let compiled = dcv::compiler::compile(&vc).expect("compiles");
    print!("{}", compiled.system.dump());
}
