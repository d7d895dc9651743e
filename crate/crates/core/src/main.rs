fn main() {
    std::process::exit(prdim::cli::main_with_args(std::env::args().collect()));
}
