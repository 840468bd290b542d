use blobflow_cli::{main_with, Args};
use clap::Parser;

fn main() {
    let args = Args::parse();
    std::process::exit(main_with(&args));
}
