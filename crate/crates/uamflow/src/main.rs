fn main() {
    if let Err(err) = uamflow::cli::run() {
        eprintln!("{}", uamflow::cli::render_error(&err));
        std::process::exit(1);
    }
}
