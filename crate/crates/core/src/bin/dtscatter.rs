fn main() {
    std::process::exit(dtscatter::cli::main_with_args(std::env::args().collect()));
}
