fn main() -> std::process::ExitCode {
    rdp_core::cli::main()
}
