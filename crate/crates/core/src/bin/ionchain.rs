fn main() {
    std::process::exit(ionchain::cli::main_with_args(std::env::args_os()));
}
