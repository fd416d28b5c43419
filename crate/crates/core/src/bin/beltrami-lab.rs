fn main() {
    std::process::exit(beltrami_lab::cli::main());
}
