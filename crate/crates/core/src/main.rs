fn main() {
    std::process::exit(fopa_noise::cli::run(std::env::args_os()));
}
