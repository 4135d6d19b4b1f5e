use std::process::exit;

fn main() {
    exit(gradfrac::io::cli_main(std::env::args()));
}
