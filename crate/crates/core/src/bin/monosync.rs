fn main() {
    std::process::exit(monosync::cli::run(std::env::args_os()));
}
