fn main() {
    std::process::exit(cstar_kernels::cli::run(std::env::args_os()));
}
