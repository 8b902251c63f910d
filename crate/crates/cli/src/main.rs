fn main() {
    std::process::exit(chiplet_place_cli::run(std::env::args_os()));
}
