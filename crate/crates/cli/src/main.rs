fn main() {
    std::process::exit(dyadic_cli::main_with_args(std::env::args_os()));
}
