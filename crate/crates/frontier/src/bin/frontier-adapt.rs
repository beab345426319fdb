fn main() {
    std::process::exit(frontier_adapt::cli::run(std::env::args_os()));
}
