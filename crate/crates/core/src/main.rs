fn main() {
    std::process::exit(covgen::cli::run(std::env::args_os()));
}
