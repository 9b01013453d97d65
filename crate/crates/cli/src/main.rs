fn main() -> std::process::ExitCode {
    duffamp_cli::main_entry()
}
