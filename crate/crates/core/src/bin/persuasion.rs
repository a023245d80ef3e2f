fn main() {
    std::process::exit(persuasion_core::cli::main_with(std::env::args_os()));
}
