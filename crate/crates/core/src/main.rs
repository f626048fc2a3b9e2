fn main() {
    std::process::exit(vemlat::cli::cli_main(std::env::args_os()));
}
