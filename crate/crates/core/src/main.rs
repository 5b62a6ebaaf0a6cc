fn main() {
    std::process::exit(kelly_capacity::cli::run(std::env::args_os()));
}
