fn main() {
    std::process::exit(urank::cli::run(std::env::args_os()));
}
