fn main() {
    std::process::exit(qgs::cli::run(std::env::args_os()));
}
