fn main() {
    std::process::exit(bfl::experiments::cli_main(std::env::args().collect()));
}
