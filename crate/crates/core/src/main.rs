fn main() {
    std::process::exit(spi_ising::cli::main_with_args(std::env::args_os()));
}
