use std::process::ExitCode;

fn main() -> ExitCode {
    harmext::cli::main_with(std::env::args_os())
}
