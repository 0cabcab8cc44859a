fn main() {
    std::process::exit(chirpsfg::cli::run(std::env::args_os()));
}
