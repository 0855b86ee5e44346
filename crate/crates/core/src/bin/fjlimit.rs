fn main() {
    std::process::exit(fjlimit::cli::run_command(std::env::args_os()));
}
