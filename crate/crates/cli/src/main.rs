fn main() {
    std::process::exit(attractorlab_cli::main_with_args(std::env::args_os()));
}
