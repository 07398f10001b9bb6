fn main() {
    std::process::exit(satnls_cli::main_with_args(std::env::args_os()));
}
