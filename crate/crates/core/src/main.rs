fn main() {
    std::process::exit(nscluster::cli::run(std::env::args_os()));
}
