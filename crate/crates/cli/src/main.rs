fn main() {
    std::process::exit(crownlab_cli::run(std::env::args_os()));
}
