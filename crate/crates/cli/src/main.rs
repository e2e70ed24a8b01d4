fn main() {
    std::process::exit(mathieu_cli::run(std::env::args_os()));
}
