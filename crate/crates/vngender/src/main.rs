use std::process::ExitCode;

fn main() -> ExitCode {
    vngender::cli::main_with_args(std::env::args_os())
}
