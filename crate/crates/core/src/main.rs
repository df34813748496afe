fn main() -> std::process::ExitCode {
    kinexch::cli::main()
}
