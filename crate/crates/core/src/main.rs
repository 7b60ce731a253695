fn main() {
    std::process::exit(ltbench::cli::dispatch(std::env::args_os()));
}
