fn main() {
    std::process::exit(bdris::cli::main_with_args(std::env::args_os()));
}
