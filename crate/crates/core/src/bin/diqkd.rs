fn main() {
    std::process::exit(diqkd::harness::cli::dispatch(std::env::args_os()));
}
