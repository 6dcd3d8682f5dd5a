use std::process::ExitCode;

fn main() -> ExitCode {
    semicorr::cli::main_with_args(std::env::args_os())
}
