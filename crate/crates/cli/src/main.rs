fn main() {
    std::process::exit(holoflow_cli::run(std::env::args_os()));
}
