fn main() -> std::process::ExitCode {
    locot2v::cli::main_with_args(std::env::args_os())
}
