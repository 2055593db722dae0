fn main() {
    std::process::exit(epr2_cli::run());
}
