fn main() {
    std::process::exit(mslz_cli::run(std::env::args_os()));
}
