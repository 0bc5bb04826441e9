fn main() {
    std::process::exit(gradsk_core::cli::main_with(std::env::args_os()));
}
