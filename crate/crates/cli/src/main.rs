fn main() {
    std::process::exit(framemul_cli::main_with_args(std::env::args_os()));
}
