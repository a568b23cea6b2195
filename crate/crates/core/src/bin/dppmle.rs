fn main() {
    std::process::exit(dppmle::cli::main_with_args(std::env::args_os()));
}
