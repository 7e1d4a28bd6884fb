fn main() {
    std::process::exit(chronofit::cli::run(std::env::args_os()));
}
