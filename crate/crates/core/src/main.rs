fn main() {
    std::process::exit(permstat::cli::run());
}
