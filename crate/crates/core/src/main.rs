fn main() {
    std::process::exit(cpdsearch::cli::run(std::env::args_os()));
}
