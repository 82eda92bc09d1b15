use std::process::ExitCode;

fn main() -> ExitCode {
    polichange::cli::main_with_args(std::env::args_os())
}
