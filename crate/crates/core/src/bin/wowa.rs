use std::process::ExitCode;

fn main() -> ExitCode {
    wowa::cli::main_with_args(std::env::args_os())
}
