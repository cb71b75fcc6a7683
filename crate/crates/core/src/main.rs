use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ac_harnack::cli::run(std::env::args_os()))
}
