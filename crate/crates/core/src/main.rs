fn main() {
    std::process::exit(epigraph::cli::run(std::env::args_os()));
}
