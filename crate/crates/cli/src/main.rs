fn main() {
    std::process::exit(feasibility_cli::cli::run(std::env::args_os()));
}
