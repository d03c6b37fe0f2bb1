fn main() {
    std::process::exit(cclab::cli::cli_main(std::env::args_os()));
}
