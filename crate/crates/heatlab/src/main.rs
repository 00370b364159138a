use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(heatlab::cli::main(std::env::args_os()))
}
