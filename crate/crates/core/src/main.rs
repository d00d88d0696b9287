fn main() {
    std::process::exit(palm::cli::run(std::env::args_os()));
}
