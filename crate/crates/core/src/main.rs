fn main() -> std::process::ExitCode {
    bellkit::cli::main_with_args(std::env::args_os())
}
