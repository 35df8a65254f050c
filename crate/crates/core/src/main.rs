fn main() {
    std::process::exit(oism::cli::main_with_args(std::env::args_os()));
}
