fn main() {
    std::process::exit(fewshot_subspace::cli::dispatch(std::env::args_os()));
}
