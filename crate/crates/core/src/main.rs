fn main() {
    std::process::exit(rough_heston::cli::run(std::env::args_os()));
}
