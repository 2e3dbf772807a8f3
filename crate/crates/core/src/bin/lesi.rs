fn main() {
    std::process::exit(lesi::cli::main());
}
