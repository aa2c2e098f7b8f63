fn main() {
    std::process::exit(collision_field::cli::run(std::env::args().collect()));
}
