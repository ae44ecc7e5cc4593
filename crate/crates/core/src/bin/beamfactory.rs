fn main() {
    std::process::exit(beamfactory::cli::run(std::env::args_os()));
}
