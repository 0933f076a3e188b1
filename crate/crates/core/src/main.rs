fn main() {
    std::process::exit(affine_cs::cli::run(std::env::args_os()));
}
