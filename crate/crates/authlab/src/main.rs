fn main() {
    std::process::exit(authlab::cli::main(std::env::args_os()));
}
