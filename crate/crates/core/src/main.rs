fn main() -> std::process::ExitCode {
    covid_forensics::cli::run()
}
