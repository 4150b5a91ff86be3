use clap::Parser;

fn main() {
    let args = qkflag::cli::Args::parse();
    std::process::exit(qkflag::cli::main_with(args));
}
