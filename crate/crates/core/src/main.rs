fn main() {
    std::process::exit(c2ucb_lab::cli::main_with_args(std::env::args_os()));
}
