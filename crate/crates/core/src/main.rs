fn main() {
    std::process::exit(stable_ratio::cli::main_with_args());
}
