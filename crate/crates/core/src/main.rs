fn main() {
    std::process::exit(adausm::harness::cli::run_cli(std::env::args_os()));
}
