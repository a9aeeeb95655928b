fn main() {
    std::process::exit(ffrsim::cli::run(std::env::args_os()));
}
