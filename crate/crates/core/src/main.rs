use std::io::{stderr, stdout};
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = dlx::cli::main_with(std::env::args(), &mut stdout().lock(), &mut stderr().lock());
    ExitCode::from(code as u8)
}
