fn main() {
    let code = logcompact::cli::run(std::env::args_os());
    std::process::exit(code);
}
