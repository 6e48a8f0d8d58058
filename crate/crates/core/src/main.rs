fn main() {
    std::process::exit(plankforge::cli::run(std::env::args_os()));
}
