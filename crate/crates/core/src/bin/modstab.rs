fn main() {
    std::process::exit(modstab::cli::run(std::env::args_os()));
}
