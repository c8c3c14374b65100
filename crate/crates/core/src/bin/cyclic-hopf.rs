fn main() {
    std::process::exit(cyclic_hopf::cli::run());
}
