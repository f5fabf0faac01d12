fn main() {
    std::process::exit(walspred::cli::run(std::env::args_os()));
}
