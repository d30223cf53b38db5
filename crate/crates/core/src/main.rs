fn main() {
    std::process::exit(eeprb::cli::main_with_args(std::env::args_os()));
}
