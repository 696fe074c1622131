fn main() {
    std::process::exit(holoris::cli::run(std::env::args_os()));
}
