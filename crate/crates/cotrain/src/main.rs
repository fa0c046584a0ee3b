fn main() {
    std::process::exit(cotrain::cli::main(std::env::args_os()));
}
