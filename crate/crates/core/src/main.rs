fn main() {
    std::process::exit(secoda::cli::run(std::env::args_os()));
}
