fn main() {
    std::process::exit(sfpa::cli::cli_main(std::env::args_os()));
}
