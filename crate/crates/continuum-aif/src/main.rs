fn main() {
    std::process::exit(continuum_aif::cli::run());
}
