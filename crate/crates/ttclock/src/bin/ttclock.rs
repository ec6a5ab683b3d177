fn main() {
    std::process::exit(ttclock::cli::run());
}
