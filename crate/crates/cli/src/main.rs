fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let (code, out) = soliton_cli::run(&argv);
    print!("{out}");
    std::process::exit(code);
}
