fn main() {
    std::process::exit(factcrowd::cli::run(std::env::args_os()));
}
