fn main() {
    std::process::exit(metamodel::cli::main(std::env::args_os()));
}
