fn main() {
    std::process::exit(markov_embed::cli::main_with_args(std::env::args_os()));
}
