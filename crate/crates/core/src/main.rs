fn main() {
    std::process::exit(nrqmc::cli::main_with_args(std::env::args_os()));
}
