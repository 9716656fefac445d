use clap::Parser;

fn main() {
    let cli = cqm_cli::Cli::parse();
    match cqm_cli::run(&cli) {
        Ok(m) => {
            for o in &m.outputs {
                println!("{}", cli.out.join(&o.path).display());
            }
        }
        Err(e) => {
            eprintln!("cqm {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
