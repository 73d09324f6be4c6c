use std::process::ExitCode;

fn main() -> ExitCode {
    mrdir::cli::main_entry()
}
