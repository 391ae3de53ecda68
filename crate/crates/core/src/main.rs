fn main() {
    if let Err(err) = simulst_latency::cli::main() {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
