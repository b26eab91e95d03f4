fn main() {
    std::process::exit(corneralg::cli::run(std::env::args_os()));
}
