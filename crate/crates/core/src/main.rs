fn main() -> std::process::ExitCode {
    nmdephasing::cli::main()
}
