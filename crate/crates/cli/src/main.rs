use std::process::ExitCode;

fn main() -> ExitCode {
    cavsqueeze::app::main_with_args(std::env::args_os())
}
