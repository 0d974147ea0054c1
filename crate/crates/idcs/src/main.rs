fn main() { std::process::exit(idcs::cli::run()) }
