fn main() {
    std::process::exit(xarmed::cli::run_cli(std::env::args_os()));
}
