fn main() {
    std::process::exit(polylet::cli::main(std::env::args()));
}
