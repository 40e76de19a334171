fn main() {
    std::process::exit(molp::cli::main_with_args(std::env::args_os()));
}
