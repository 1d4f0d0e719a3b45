fn main() {
    std::process::exit(slin::cli::run_cli(std::env::args_os()));
}
