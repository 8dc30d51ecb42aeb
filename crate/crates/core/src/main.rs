fn main() {
    std::process::exit(clearq_core::cli::main_with_args(std::env::args_os()));
}
