fn main() {
    std::process::exit(cpmult::cli::run(std::env::args().skip(1)));
}
