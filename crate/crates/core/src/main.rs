fn main() {
    std::process::exit(smellscan::cli::run(std::env::args_os()));
}
