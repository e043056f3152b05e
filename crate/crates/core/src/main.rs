fn main() {
    std::process::exit(reactive_time::cli::main_with_args(std::env::args_os()));
}
