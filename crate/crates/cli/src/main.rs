fn main() {
    std::process::exit(lacewalk_cli::main_with(std::env::args_os()));
}
