use std::process::ExitCode;

fn main() -> ExitCode {
    piou::cli::run(std::env::args_os())
}
