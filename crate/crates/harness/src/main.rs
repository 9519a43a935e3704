fn main() {
    std::process::exit(kacrice_harness::run_cli(std::env::args_os()));
}
