fn main() {
    std::process::exit(dwpap::cli::run(std::env::args_os()));
}
