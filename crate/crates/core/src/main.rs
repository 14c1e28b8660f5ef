fn main() {
    std::process::exit(catq::cli::run(std::env::args_os()));
}
