fn main() {
    std::process::exit(bogoscope::cli::run(std::env::args_os()));
}
