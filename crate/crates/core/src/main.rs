fn main() -> std::process::ExitCode {
    reidtrack::cli::main()
}
