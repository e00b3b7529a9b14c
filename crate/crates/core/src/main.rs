fn main() {
    std::process::exit(pcm_em::cli::main_with_args(std::env::args_os()));
}
