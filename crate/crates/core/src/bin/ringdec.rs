fn main() {
    std::process::exit(ringdec::cli::run(std::env::args_os()));
}
