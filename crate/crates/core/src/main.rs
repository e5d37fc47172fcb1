fn main() {
    std::process::exit(omsim::cli::run(std::env::args_os()));
}
