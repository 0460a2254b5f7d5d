fn main() {
    std::process::exit(sfem_dmp::cli::run_from(std::env::args_os()));
}
