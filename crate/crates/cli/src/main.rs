use clap::Parser;
use subpress_cli::JobSpec;

fn main() {
    let job = JobSpec::parse();
    std::process::exit(subpress_cli::run(&job));
}
