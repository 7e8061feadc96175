fn main() {
    std::process::exit(porous_homog::cli::run(std::env::args_os()));
}
