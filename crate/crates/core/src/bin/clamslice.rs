fn main() {
    std::process::exit(clamslice::pipeline::cli::run(std::env::args_os()));
}
