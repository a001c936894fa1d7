fn main() {
    std::process::exit(andloc::cli::main());
}
