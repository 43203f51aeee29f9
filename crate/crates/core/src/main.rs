fn main() {
    std::process::exit(actigraph::cli::run(std::env::args_os()));
}
