fn main() {
    std::process::exit(mfnipr::cli::run(std::env::args_os()));
}
