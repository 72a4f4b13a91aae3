fn main() {
    std::process::exit(frechet::cli::main_entry());
}
