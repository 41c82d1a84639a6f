fn main() {
    std::process::exit(cad_cli::run(std::env::args_os()));
}
