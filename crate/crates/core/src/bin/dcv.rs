fn main() {
    std::process::exit(dcv::cli::main());
}
