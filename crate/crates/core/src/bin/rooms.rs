fn main() {
    std::process::exit(rooms::cli::run(std::env::args_os()));
}
