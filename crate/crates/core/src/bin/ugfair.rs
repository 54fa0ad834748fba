fn main() {
    std::process::exit(ugfair::cli::run(std::env::args_os()));
}
