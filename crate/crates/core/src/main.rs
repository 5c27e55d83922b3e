fn main() -> std::process::ExitCode {
    qkpc::cli::run(std::env::args_os())
}
