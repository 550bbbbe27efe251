fn main() -> std::process::ExitCode {
    mood_core::cli::main()
}
