fn main() {
    std::process::exit(gentrans_cli::cli::run(std::env::args_os()));
}
