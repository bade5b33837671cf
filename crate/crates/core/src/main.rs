fn main() {
    std::process::exit(nsopt::cli::main());
}
