fn main() {
    std::process::exit(discipline_lab::cli::run(std::env::args_os()));
}
