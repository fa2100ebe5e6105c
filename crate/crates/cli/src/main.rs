fn main() {
    std::process::exit(subdiff_cli::run_cli(std::env::args_os()));
}
