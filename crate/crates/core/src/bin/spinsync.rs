fn main() {
    std::process::exit(spinsync::cli::main_with_args(std::env::args_os()));
}
