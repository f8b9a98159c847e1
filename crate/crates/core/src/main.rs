fn main() {
    std::process::exit(qrng_audit::cli::run(std::env::args_os()));
}
