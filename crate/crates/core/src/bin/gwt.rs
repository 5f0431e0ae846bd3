fn main() {
    std::process::exit(gwt_core::cli::main_with_args(std::env::args_os()));
}
