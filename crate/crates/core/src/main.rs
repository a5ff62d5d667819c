use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match hbvp::cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    std::process::exit(hbvp::cli::run(&cli));
}
