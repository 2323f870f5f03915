fn main() {
    std::process::exit(mub_core::cli::cli_dispatch(std::env::args_os()));
}
