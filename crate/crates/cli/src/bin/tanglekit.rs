use clap::Parser;
use shell::{run, Cli, EXIT_ERROR};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli.command, &cli.config);
    if outcome.code == EXIT_ERROR && outcome.output.starts_with("error: ") {
        eprint!("{}", outcome.output);
    } else {
        print!("{}", outcome.output);
    }
    std::process::exit(outcome.code);
}
