fn main() {
    std::process::exit(saddle_bench::cli::main_with_args(std::env::args_os()));
}
