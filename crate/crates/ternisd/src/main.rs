fn main() {
    std::process::exit(ternisd::cli::main_with_args(std::env::args_os()));
}
