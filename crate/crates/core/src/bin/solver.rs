fn main() {
    std::process::exit(stokes_mg::cli::main_with_args(std::env::args_os()));
}
