fn main() {
    std::process::exit(qcollide_cli::run(std::env::args_os()));
}
