fn main() {
    std::process::exit(puqca::cli::run());
}
