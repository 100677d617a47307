fn main() {
    std::process::exit(morrey_cli::run(std::env::args().collect()));
}
