use clap::Parser;
use hmimo_cli::Cli;

fn main() {
    let cli = Cli::parse();
    match hmimo_cli::run(&cli) {
        Ok(summary) => {
            for f in &summary.failures {
                eprintln!("warning: {f}");
            }
            eprintln!(
                "wrote {} to {}",
                summary.outputs.join(", "),
                summary.out_dir.display()
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
