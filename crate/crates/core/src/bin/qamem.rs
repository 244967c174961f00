fn main() {
    std::process::exit(qamem::cli::main_from_env());
}
