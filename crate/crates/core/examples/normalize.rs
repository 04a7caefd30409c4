//! Prints a creditmap document in normalized form.

use std::io::Write;

use credit_ledger::jsonld::{parse_creditmap, serialize_creditmap, ParseMode};

fn main() {
    let path = std::env::args().nth(1).expect("usage: normalize <file.jsonld>");
    let bytes = std::fs::read(&path).expect("readable file");
    match parse_creditmap(&bytes, ParseMode::Lenient) {
        Ok((map, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            std::io::stdout().write_all(&serialize_creditmap(&map)).unwrap();
        }
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            std::process::exit(1);
        }
    }
}
