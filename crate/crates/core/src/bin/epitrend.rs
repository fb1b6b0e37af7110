fn main() {
    std::process::exit(epitrend::cli::run(std::env::args_os()));
}
