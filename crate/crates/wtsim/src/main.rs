fn main() -> std::process::ExitCode {
    wtsim::cli::main()
}
