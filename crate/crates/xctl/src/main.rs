fn main() {
    std::process::exit(xctl::cli::run(std::env::args_os()));
}
