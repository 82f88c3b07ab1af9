fn main() {
    std::process::exit(orbifold_hae::cli::run(std::env::args_os()));
}
