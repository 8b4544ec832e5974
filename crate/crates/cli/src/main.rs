fn main() {
    std::process::exit(hsbnet_cli::main_with_args(std::env::args_os()));
}
