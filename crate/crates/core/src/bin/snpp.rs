fn main() {
    std::process::exit(snpp::cli::main_with_args(std::env::args_os()));
}
