fn main() {
    std::process::exit(copoly_cli::run(std::env::args_os()));
}
