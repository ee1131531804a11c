use std::process::ExitCode;

fn main() -> ExitCode {
    llfp::cli::run()
}
