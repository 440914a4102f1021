fn main() {
    std::process::exit(twpinn::harness::cli::main_with_args(std::env::args_os()));
}
