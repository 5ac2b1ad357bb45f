fn main() {
    std::process::exit(shadowjob::cli::run(std::env::args_os()));
}
