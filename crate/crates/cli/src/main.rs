fn main() {
    std::process::exit(mrball_cli::run(std::env::args_os()));
}
