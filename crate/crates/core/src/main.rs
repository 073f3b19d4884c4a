fn main() {
    std::process::exit(knn_entropy::harness::cli::run(std::env::args_os()));
}
