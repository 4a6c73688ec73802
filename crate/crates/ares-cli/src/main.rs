fn main() {
    std::process::exit(ares_cli::run());
}
