use std::process::ExitCode;

fn main() -> ExitCode {
    edgescale::cli::main_with(std::env::args_os())
}
