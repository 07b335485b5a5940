fn main() {
    eprintln!("bolt CLI: not wired up yet");
    std::process::exit(2);
}
