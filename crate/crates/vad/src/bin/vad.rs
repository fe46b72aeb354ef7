fn main() {
    std::process::exit(vad::cli::run(std::env::args_os()));
}
