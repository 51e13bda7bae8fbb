fn main() {
    std::process::exit(polyface::cli::run(std::env::args_os()));
}
