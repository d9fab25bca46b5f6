fn main() {
    std::process::exit(gframe_lab::cli::main_with_args(std::env::args_os()));
}
