use clap::Parser;

fn main() {
    let cli = ats_cli::Cli::parse();
    let code = match ats_cli::run(&cli, &mut std::io::stdout().lock()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ats_cli::classify(&e)
        }
    };
    std::process::exit(code.as_i32());
}
