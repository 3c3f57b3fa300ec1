fn main() {
    std::process::exit(obstrukt::cli::main_with_args(std::env::args_os()));
}
