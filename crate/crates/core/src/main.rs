fn main() {
    std::process::exit(haps_isac::cli::cli_main(std::env::args_os()));
}
