fn main() {
    std::process::exit(semline_cli::main_with_args(std::env::args_os()));
}
